#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sca {

/// A release identifier ordered with the Maven ComparableVersion rules.
///
/// The text is lower-cased and split on '.', '-' and digit/letter
/// transitions. A '-' (and every digit/letter transition, and a qualifier
/// after '.') opens a nested sub-list, so "1-1" sorts below "1.1" and
/// "1.0.RC1" equals "1.0-RC1". Qualifiers order as
/// alpha < beta < milestone < rc (= cr) < snapshot < release < sp, with any
/// unknown qualifier after sp in lexical order. Trailing null items ("0",
/// "ga", "final", "release", empty lists) are trimmed, which makes "1.0"
/// equal to "1.0.0".
///
/// Where Maven compares items of different kinds by kind alone, the
/// comparison here first places each item below, level with or above a
/// missing item. That keeps the order transitive; Maven's own rules cycle
/// on inputs such as "3" < "3b" < "3ga-m0.06" < "3".
class PackageVersion {
public:
    PackageVersion() = default;

    /// Throws Error{EmptyVersion} on empty text or text containing whitespace.
    static PackageVersion parse(std::string_view text);

    const std::string& original() const noexcept { return original_; }

    /// Normalized rendering; two versions compare equal iff their canonical
    /// forms are equal.
    std::string canonical() const;

    friend std::strong_ordering operator<=>(const PackageVersion& a, const PackageVersion& b);
    friend bool operator==(const PackageVersion& a, const PackageVersion& b)
    {
        return (a <=> b) == 0;
    }

    struct Item {
        enum class Kind { Integer, Qualifier, List };
        Kind kind = Kind::List;
        // Integer: digits without leading zeros. Qualifier: the alias-resolved
        // qualifier text.
        std::string value;
        std::vector<Item> items;
    };

private:
    std::string original_;
    Item root_;
};

PackageVersion parse_version(std::string_view text);

std::strong_ordering compare(const PackageVersion& a, const PackageVersion& b);

/// Strict string identity of the original text, used where a version names a
/// concrete artifact rather than a point in the order.
struct SameOriginal {
    bool operator()(const PackageVersion& a, const PackageVersion& b) const
    {
        return a.original() == b.original();
    }
};

struct Bound {
    PackageVersion version;
    bool inclusive = false;

    friend bool operator==(const Bound& a, const Bound& b)
    {
        return a.inclusive == b.inclusive && a.version.original() == b.version.original();
    }
};

/// Conjunction of an optional lower and an optional upper bound.
struct RangeClause {
    std::optional<Bound> lower;
    std::optional<Bound> upper;

    bool contains(const PackageVersion& v) const;
    friend bool operator==(const RangeClause&, const RangeClause&) = default;
};

enum class RangeSyntax { MavenBracket, ComparatorList };

/// Disjunction of clauses. An empty clause list matches nothing.
class VersionRange {
public:
    VersionRange() = default;
    explicit VersionRange(std::vector<RangeClause> clauses);

    const std::vector<RangeClause>& clauses() const noexcept { return clauses_; }
    bool contains(const PackageVersion& v) const;

    /// True when some clause has no lower bound, i.e. the range reaches back to
    /// every earlier release. Method-level analysis uses this to apply the
    /// callable existence filter.
    bool lower_unbounded() const;

    std::string to_maven_string() const;
    std::string to_comparator_string() const;

    friend bool operator==(const VersionRange&, const VersionRange&) = default;

private:
    std::vector<RangeClause> clauses_;
};

/// Throws Error{MalformedRange}.
VersionRange parse_range(std::string_view text, RangeSyntax syntax);

struct AffectedVersions {
    std::string project_id;
    std::vector<PackageVersion> all_versions;        // sorted, unique
    std::vector<PackageVersion> vulnerable_versions; // sorted, subset of all_versions
};

AffectedVersions affected_versions(std::string project_id,
                                   std::span<const PackageVersion> all,
                                   std::span<const VersionRange> ranges);

} // namespace sca
