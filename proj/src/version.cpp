#include <sca/version.hpp>

#include <sca/error.hpp>

#include <algorithm>
#include <array>
#include <cctype>

namespace sca {

namespace {

using Item = PackageVersion::Item;
using Kind = Item::Kind;

constexpr std::array<std::string_view, 7> kQualifiers = {
    "alpha", "beta", "milestone", "rc", "snapshot", "", "sp",
};
constexpr std::size_t kReleaseIndex = 5;

bool is_digit(char c)
{
    return c >= '0' && c <= '9';
}

std::string resolve_alias(std::string value, bool followed_by_digit)
{
    if (followed_by_digit && value.size() == 1) {
        switch (value[0]) {
        case 'a':
            return "alpha";
        case 'b':
            return "beta";
        case 'm':
            return "milestone";
        default:
            break;
        }
    }
    if (value == "ga" || value == "final" || value == "release")
        return "";
    if (value == "cr")
        return "rc";
    return value;
}

// Known qualifiers map to their single-digit rank; unknown ones sort after
// "sp" lexically.
std::string comparable_qualifier(std::string_view q)
{
    auto it = std::find(kQualifiers.begin(), kQualifiers.end(), q);
    if (it != kQualifiers.end())
        return std::to_string(it - kQualifiers.begin());
    return std::to_string(kQualifiers.size()) + "-" + std::string(q);
}

Item make_integer(std::string_view digits)
{
    auto first = digits.find_first_not_of('0');
    Item item;
    item.kind = Kind::Integer;
    item.value = first == std::string_view::npos ? "0" : std::string(digits.substr(first));
    return item;
}

Item make_qualifier(std::string_view text, bool followed_by_digit)
{
    Item item;
    item.kind = Kind::Qualifier;
    item.value = resolve_alias(std::string(text), followed_by_digit);
    return item;
}

Item make_item(bool digit, std::string_view text)
{
    return digit ? make_integer(text) : make_qualifier(text, false);
}

bool is_null(const Item& item)
{
    switch (item.kind) {
    case Kind::Integer:
        return item.value == "0";
    case Kind::Qualifier:
        return comparable_qualifier(item.value) == std::to_string(kReleaseIndex);
    case Kind::List:
        return item.items.empty();
    }
    return false;
}

void normalize(Item& list)
{
    for (auto i = list.items.size(); i-- > 0;) {
        if (is_null(list.items[i]))
            list.items.erase(list.items.begin() + static_cast<std::ptrdiff_t>(i));
        else if (list.items[i].kind != Kind::List)
            break;
    }
}

int sign(int v)
{
    return (v > 0) - (v < 0);
}

int compare_item(const Item& a, const Item* b);

// Where an item sits relative to a missing one. Items of different kinds
// order by side first so that comparisons through a missing item agree
// with direct ones; level items are interchangeable with a missing item.
// A zero that survives normalization is always followed by a non-zero
// integer in its list, so integers count as above a missing item.
int side(const Item& item)
{
    return compare_item(item, nullptr);
}

int kind_rank(Kind kind)
{
    switch (kind) {
    case Kind::Qualifier:
        return 0;
    case Kind::List:
        return 1;
    case Kind::Integer:
        return 2;
    }
    return 0;
}

int compare_kinds(const Item& a, const Item& b)
{
    const int sa = side(a);
    const int sb = side(b);
    if (sa != sb)
        return sa < sb ? -1 : 1;
    if (sa == 0)
        return 0;
    return sign(kind_rank(a.kind) - kind_rank(b.kind));
}

int compare_integer(const Item& a, const Item* b)
{
    if (b == nullptr)
        return 1;
    if (b->kind != Kind::Integer)
        return compare_kinds(a, *b);
    if (a.value.size() != b->value.size())
        return a.value.size() < b->value.size() ? -1 : 1;
    return sign(a.value.compare(b->value));
}

int compare_qualifier(const Item& a, const Item* b)
{
    if (b == nullptr)
        return sign(comparable_qualifier(a.value).compare(std::to_string(kReleaseIndex)));
    if (b->kind != Kind::Qualifier)
        return compare_kinds(a, *b);
    return sign(comparable_qualifier(a.value).compare(comparable_qualifier(b->value)));
}

int compare_list(const Item& a, const Item* b)
{
    if (b == nullptr) {
        for (const auto& item : a.items) {
            if (int r = compare_item(item, nullptr); r != 0)
                return r;
        }
        return 0;
    }
    if (b->kind != Kind::List)
        return compare_kinds(a, *b);
    const auto n = std::max(a.items.size(), b->items.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Item* l = i < a.items.size() ? &a.items[i] : nullptr;
        const Item* r = i < b->items.size() ? &b->items[i] : nullptr;
        int result = 0;
        if (l == nullptr)
            result = r == nullptr ? 0 : -compare_item(*r, nullptr);
        else
            result = compare_item(*l, r);
        if (result != 0)
            return result;
    }
    return 0;
}

int compare_item(const Item& a, const Item* b)
{
    switch (a.kind) {
    case Kind::Integer:
        return compare_integer(a, b);
    case Kind::Qualifier:
        return compare_qualifier(a, b);
    case Kind::List:
        return compare_list(a, b);
    }
    return 0;
}

void render(const Item& list, std::string& out)
{
    bool first = true;
    for (const auto& item : list.items) {
        if (!first)
            out += item.kind == Kind::List ? '-' : '.';
        first = false;
        if (item.kind == Kind::List)
            render(item, out);
        else
            out += item.value;
    }
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

} // namespace

PackageVersion PackageVersion::parse(std::string_view text)
{
    if (text.empty())
        throw Error(ErrorCode::EmptyVersion, "version text is empty");
    if (std::any_of(text.begin(), text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
        throw Error(ErrorCode::EmptyVersion, "version text contains whitespace: '" + std::string(text) + "'");

    PackageVersion version;
    version.original_ = std::string(text);

    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    // Each '-' or digit/letter transition opens a list nested inside the
    // current one, so the open lists always form a chain ending at the
    // innermost. Track them by index path from the root.
    std::vector<Item*> stack { &version.root_ };
    auto open_sublist = [&stack] {
        Item* current = stack.back();
        current->items.push_back(Item {});
        stack.push_back(&current->items.back());
    };

    bool digit = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const char c = lower[i];
        const std::string_view token(lower.data() + start, i - start);
        if (c == '.' || c == '-') {
            stack.back()->items.push_back(i == start ? make_integer("0") : make_item(digit, token));
            start = i + 1;
            if (c == '-')
                open_sublist();
        } else if (is_digit(c)) {
            if (!digit && i > start) {
                stack.back()->items.push_back(make_qualifier(token, true));
                start = i;
                open_sublist();
            }
            digit = true;
        } else {
            if (digit && i > start) {
                stack.back()->items.push_back(make_integer(token));
                start = i;
                open_sublist();
            } else if (i == start && i > 0 && lower[i - 1] == '.' && !stack.back()->items.empty()) {
                // ".x" reads as "-x" for a qualifier.
                open_sublist();
            }
            digit = false;
        }
    }
    if (lower.size() > start)
        stack.back()->items.push_back(make_item(digit, std::string_view(lower).substr(start)));

    while (!stack.empty()) {
        normalize(*stack.back());
        stack.pop_back();
    }
    return version;
}

std::string PackageVersion::canonical() const
{
    std::string out;
    render(root_, out);
    return out;
}

std::strong_ordering operator<=>(const PackageVersion& a, const PackageVersion& b)
{
    const int r = compare_item(a.root_, &b.root_);
    if (r < 0)
        return std::strong_ordering::less;
    if (r > 0)
        return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

PackageVersion parse_version(std::string_view text)
{
    return PackageVersion::parse(text);
}

std::strong_ordering compare(const PackageVersion& a, const PackageVersion& b)
{
    return a <=> b;
}

bool RangeClause::contains(const PackageVersion& v) const
{
    if (lower) {
        auto c = v <=> lower->version;
        if (c < 0 || (c == 0 && !lower->inclusive))
            return false;
    }
    if (upper) {
        auto c = v <=> upper->version;
        if (c > 0 || (c == 0 && !upper->inclusive))
            return false;
    }
    return true;
}

VersionRange::VersionRange(std::vector<RangeClause> clauses)
    : clauses_(std::move(clauses))
{
}

bool VersionRange::contains(const PackageVersion& v) const
{
    return std::any_of(clauses_.begin(), clauses_.end(), [&v](const RangeClause& c) { return c.contains(v); });
}

bool VersionRange::lower_unbounded() const
{
    return std::any_of(clauses_.begin(), clauses_.end(), [](const RangeClause& c) { return !c.lower; });
}

std::string VersionRange::to_maven_string() const
{
    std::string out;
    for (const auto& clause : clauses_) {
        if (!out.empty())
            out += ',';
        if (clause.lower && clause.upper && clause.lower->inclusive && clause.upper->inclusive
            && clause.lower->version.original() == clause.upper->version.original()) {
            out += '[' + clause.lower->version.original() + ']';
            continue;
        }
        out += clause.lower && clause.lower->inclusive ? '[' : '(';
        if (clause.lower)
            out += clause.lower->version.original();
        out += ',';
        if (clause.upper)
            out += clause.upper->version.original();
        out += clause.upper && clause.upper->inclusive ? ']' : ')';
    }
    return out;
}

std::string VersionRange::to_comparator_string() const
{
    std::string out;
    for (const auto& clause : clauses_) {
        if (!out.empty())
            out += "; ";
        if (clause.lower && clause.upper && clause.lower->inclusive && clause.upper->inclusive
            && clause.lower->version.original() == clause.upper->version.original()) {
            out += "=" + clause.lower->version.original();
            continue;
        }
        std::string part;
        if (clause.lower)
            part += (clause.lower->inclusive ? ">=" : ">") + clause.lower->version.original();
        if (clause.upper) {
            if (!part.empty())
                part += ", ";
            part += (clause.upper->inclusive ? "<=" : "<") + clause.upper->version.original();
        }
        // A clause with neither bound matches everything.
        out += part.empty() ? ">=0" : part;
    }
    return out;
}

namespace {

[[noreturn]] void malformed(std::string_view text, const std::string& why)
{
    throw Error(ErrorCode::MalformedRange, "'" + std::string(text) + "': " + why);
}

PackageVersion range_version(std::string_view full, std::string_view text)
{
    if (text.find_first_of("[](),;<>=") != std::string_view::npos)
        malformed(full, "stray range syntax in version '" + std::string(text) + "'");
    try {
        return PackageVersion::parse(text);
    } catch (const Error&) {
        malformed(full, "unparseable version '" + std::string(text) + "'");
    }
}

void check_order(std::string_view full, const RangeClause& clause)
{
    if (!clause.lower || !clause.upper)
        return;
    auto c = clause.lower->version <=> clause.upper->version;
    if (c > 0)
        malformed(full, "lower bound exceeds upper bound");
    if (c == 0 && !(clause.lower->inclusive && clause.upper->inclusive))
        malformed(full, "empty interval");
}

VersionRange parse_maven(std::string_view text)
{
    std::vector<RangeClause> clauses;
    std::string_view rest = trim(text);
    if (rest.empty())
        malformed(text, "empty range");

    if (rest.front() != '[' && rest.front() != '(') {
        // A bare version is a single exact requirement.
        auto v = range_version(text, rest);
        clauses.push_back(RangeClause { Bound { v, true }, Bound { v, true } });
        return VersionRange(std::move(clauses));
    }

    while (!rest.empty()) {
        const char open = rest.front();
        if (open != '[' && open != '(')
            malformed(text, "expected '[' or '('");
        const auto close_pos = rest.find_first_of("])");
        if (close_pos == std::string_view::npos)
            malformed(text, "unbalanced brackets");
        const char close = rest[close_pos];
        const std::string_view body = rest.substr(1, close_pos - 1);
        if (body.find_first_of("[(") != std::string_view::npos)
            malformed(text, "nested brackets");

        RangeClause clause;
        const auto comma = body.find(',');
        if (comma == std::string_view::npos) {
            if (open != '[' || close != ']')
                malformed(text, "single-version range must use [v]");
            auto v_text = trim(body);
            if (v_text.empty())
                malformed(text, "empty bracket");
            auto v = range_version(text, v_text);
            clause.lower = Bound { v, true };
            clause.upper = Bound { v, true };
        } else {
            if (body.find(',', comma + 1) != std::string_view::npos)
                malformed(text, "too many commas in bracket");
            auto lo = trim(body.substr(0, comma));
            auto hi = trim(body.substr(comma + 1));
            if (!lo.empty())
                clause.lower = Bound { range_version(text, lo), open == '[' };
            else if (open == '[')
                malformed(text, "unbounded lower end must use '('");
            if (!hi.empty())
                clause.upper = Bound { range_version(text, hi), close == ']' };
            else if (close == ']')
                malformed(text, "unbounded upper end must use ')'");
        }
        check_order(text, clause);
        clauses.push_back(std::move(clause));

        rest = trim(rest.substr(close_pos + 1));
        if (!rest.empty()) {
            if (rest.front() != ',')
                malformed(text, "expected ',' between ranges");
            rest = trim(rest.substr(1));
            if (rest.empty())
                malformed(text, "trailing ','");
        }
    }
    return VersionRange(std::move(clauses));
}

RangeClause parse_comparator_clause(std::string_view full, std::string_view clause_text)
{
    RangeClause clause;
    bool exact = false;
    std::size_t parts = 0;
    std::string_view rest = clause_text;
    while (true) {
        const auto comma = rest.find(',');
        const auto part = trim(rest.substr(0, comma));
        if (part.empty())
            malformed(full, "empty comparator");
        ++parts;

        std::string_view op;
        for (std::string_view candidate : { ">=", "<=", "==", ">", "<", "=" }) {
            if (part.substr(0, candidate.size()) == candidate) {
                op = candidate;
                break;
            }
        }
        const auto v = range_version(full, trim(part.substr(op.size())));
        if (op.empty() || op == "=" || op == "==") {
            exact = true;
            clause.lower = Bound { v, true };
            clause.upper = Bound { v, true };
        } else if (op[0] == '>') {
            if (clause.lower)
                malformed(full, "two lower bounds in one clause");
            clause.lower = Bound { v, op.size() == 2 };
        } else {
            if (clause.upper)
                malformed(full, "two upper bounds in one clause");
            clause.upper = Bound { v, op.size() == 2 };
        }

        if (comma == std::string_view::npos)
            break;
        rest = rest.substr(comma + 1);
    }
    if (exact && parts > 1)
        malformed(full, "exact comparator combined with other bounds");
    check_order(full, clause);
    return clause;
}

VersionRange parse_comparators(std::string_view text)
{
    std::vector<RangeClause> clauses;
    std::string_view rest = text;
    if (trim(rest).empty())
        malformed(text, "empty range");
    while (true) {
        const auto semi = rest.find(';');
        clauses.push_back(parse_comparator_clause(text, rest.substr(0, semi)));
        if (semi == std::string_view::npos)
            break;
        rest = rest.substr(semi + 1);
    }
    return VersionRange(std::move(clauses));
}

} // namespace

VersionRange parse_range(std::string_view text, RangeSyntax syntax)
{
    return syntax == RangeSyntax::MavenBracket ? parse_maven(text) : parse_comparators(text);
}

AffectedVersions affected_versions(std::string project_id,
                                   std::span<const PackageVersion> all,
                                   std::span<const VersionRange> ranges)
{
    AffectedVersions result;
    result.project_id = std::move(project_id);
    result.all_versions.assign(all.begin(), all.end());
    std::stable_sort(result.all_versions.begin(), result.all_versions.end());
    result.all_versions.erase(std::unique(result.all_versions.begin(), result.all_versions.end()),
                              result.all_versions.end());
    for (const auto& v : result.all_versions) {
        if (std::any_of(ranges.begin(), ranges.end(), [&v](const VersionRange& r) { return r.contains(v); }))
            result.vulnerable_versions.push_back(v);
    }
    return result;
}

} // namespace sca
