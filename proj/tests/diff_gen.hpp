#pragma once

#include "support.hpp"

#include <sca/patch.hpp>

#include <string>
#include <vector>

namespace testing {

// A random multi-file unified diff together with the line numbers it should
// yield, plus non-overlapping callable spans over both file versions.
struct SyntheticDiff {
    std::string text;
    std::vector<sca::FileDiff> expected;
    std::vector<sca::CallableSpan> first_patched;
    std::vector<sca::CallableSpan> last_vulnerable;
};

inline std::vector<sca::CallableSpan> random_spans(Rng& rng, const std::string& file, int lines, int& counter)
{
    std::vector<sca::CallableSpan> out;
    int at = 1;
    while (at <= lines + 5) {
        at += rng.between(0, 3);
        const int end = at + rng.between(0, 6);
        if (rng.chance(0.8))
            out.push_back(sca::CallableSpan { "m" + std::to_string(counter++) + "()", file, at, end });
        at = end + 1;
    }
    return out;
}

inline SyntheticDiff random_diff(Rng& rng, bool git_format = true)
{
    SyntheticDiff d;
    const int files = rng.between(1, 3);
    int counter = 0;
    for (int f = 0; f < files; ++f) {
        const std::string path = "src/F" + std::to_string(f) + ".java";
        sca::FileDiff expect { path, {}, {} };
        if (git_format)
            d.text += "diff --git a/" + path + " b/" + path + "\nindex 1111111..2222222 100644\n";
        d.text += "--- a/" + path + "\n+++ b/" + path + "\n";
        int old_line = 1;
        int new_line = 1;
        const int hunks = rng.between(1, 3);
        for (int h = 0; h < hunks; ++h) {
            const int gap = rng.between(0, 8);
            old_line += gap;
            new_line += gap;
            std::string body;
            const int old_start = old_line;
            const int new_start = new_line;
            int old_count = 0;
            int new_count = 0;
            const int ops = rng.between(1, 10);
            for (int o = 0; o < ops; ++o) {
                const int kind = rng.between(0, 2);
                if (kind == 0) {
                    body += " ctx\n";
                    ++old_line, ++new_line, ++old_count, ++new_count;
                } else if (kind == 1) {
                    body += "-old\n";
                    expect.modified_lines_pre.insert(old_line++);
                    ++old_count;
                } else {
                    body += "+new\n";
                    expect.modified_lines_post.insert(new_line++);
                    ++new_count;
                }
            }
            d.text += "@@ -" + std::to_string(old_count ? old_start : old_start - 1) + "," + std::to_string(old_count)
                + " +" + std::to_string(new_count ? new_start : new_start - 1) + "," + std::to_string(new_count)
                + " @@\n" + body;
        }
        d.expected.push_back(expect);
        auto fp = random_spans(rng, path, new_line, counter);
        auto lv = random_spans(rng, path, old_line, counter);
        // Callables usually keep their signature across the fix.
        for (std::size_t i = 0; i < std::min(fp.size(), lv.size()); ++i)
            if (rng.chance(0.5))
                lv[i].signature = fp[i].signature;
        d.first_patched.insert(d.first_patched.end(), fp.begin(), fp.end());
        d.last_vulnerable.insert(d.last_vulnerable.end(), lv.begin(), lv.end());
    }
    std::sort(d.expected.begin(), d.expected.end(),
              [](const sca::FileDiff& a, const sca::FileDiff& b) { return a.path < b.path; });
    return d;
}

inline sca::CallableIndex index_of(const std::vector<sca::CallableSpan>& spans)
{
    sca::CallableIndex idx;
    for (const auto& s : spans)
        idx.add(s);
    return idx;
}

} // namespace testing
