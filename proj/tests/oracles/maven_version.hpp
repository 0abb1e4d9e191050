#pragma once

// Reference port of Maven's ComparableVersion, written as the original class
// hierarchy so it shares no code with the library's flat item tree.

#include <algorithm>
#include <cctype>
#include <memory>
#include <string>
#include <vector>

namespace oracle {

// Sort key for the transitive variant of the order: the side of the item
// relative to a missing one, then kind, then payload.
struct OrderKey {
    int side = 0;
    int kind = 0;
    std::string payload;
    bool integer = false;
    std::vector<OrderKey> children;
};

inline int compare_keys(const OrderKey& a, const OrderKey& b)
{
    if (a.side != b.side)
        return a.side < b.side ? -1 : 1;
    if (a.side == 0)
        return 0;
    if (a.kind != b.kind)
        return a.kind < b.kind ? -1 : 1;
    if (a.integer) {
        if (a.payload.size() != b.payload.size())
            return a.payload.size() < b.payload.size() ? -1 : 1;
        return a.payload < b.payload ? -1 : (a.payload > b.payload ? 1 : 0);
    }
    if (a.kind == 1) {
        const OrderKey missing;
        for (std::size_t i = 0; i < std::max(a.children.size(), b.children.size()); ++i) {
            const auto& l = i < a.children.size() ? a.children[i] : missing;
            const auto& r = i < b.children.size() ? b.children[i] : missing;
            if (int c = compare_keys(l, r))
                return c;
        }
        return 0;
    }
    return a.payload < b.payload ? -1 : (a.payload > b.payload ? 1 : 0);
}

class MavenItem {
public:
    enum Type { Int, Str, List };
    virtual OrderKey key() const = 0;
    virtual ~MavenItem() = default;
    virtual Type type() const = 0;
    virtual bool is_null() const = 0;
    // Sign of this compared to other; other == nullptr means "missing".
    virtual int compare_to(const MavenItem* other) const = 0;
};

class IntItem final : public MavenItem {
public:
    explicit IntItem(std::string digits)
    {
        auto nz = digits.find_first_not_of('0');
        value_ = nz == std::string::npos ? "0" : digits.substr(nz);
    }
    Type type() const override { return Int; }
    OrderKey key() const override { return OrderKey { 1, 2, value_, true, {} }; }
    bool is_null() const override { return value_ == "0"; }
    int compare_to(const MavenItem* other) const override
    {
        if (!other)
            return is_null() ? 0 : 1;
        if (other->type() != Int)
            return 1;
        const auto& o = static_cast<const IntItem*>(other)->value_;
        if (value_.size() != o.size())
            return value_.size() < o.size() ? -1 : 1;
        return value_ < o ? -1 : (value_ > o ? 1 : 0);
    }

private:
    std::string value_;
};

class StringItem final : public MavenItem {
public:
    StringItem(std::string value, bool followed_by_digit)
    {
        if (followed_by_digit && value.size() == 1) {
            if (value == "a")
                value = "alpha";
            else if (value == "b")
                value = "beta";
            else if (value == "m")
                value = "milestone";
        }
        if (value == "ga" || value == "final" || value == "release")
            value = "";
        else if (value == "cr")
            value = "rc";
        value_ = value;
    }
    Type type() const override { return Str; }
    OrderKey key() const override
    {
        const auto c = comparable(value_);
        return OrderKey { sgn(c.compare(release_index())), 0, c, false, {} };
    }
    bool is_null() const override { return comparable(value_) == release_index(); }
    int compare_to(const MavenItem* other) const override
    {
        if (!other)
            return sgn(comparable(value_).compare(release_index()));
        if (other->type() != Str)
            return -1;
        return sgn(comparable(value_).compare(comparable(static_cast<const StringItem*>(other)->value_)));
    }

private:
    static int sgn(int v) { return (v > 0) - (v < 0); }
    static const std::vector<std::string>& qualifiers()
    {
        static const std::vector<std::string> q { "alpha", "beta", "milestone", "rc", "snapshot", "", "sp" };
        return q;
    }
    static std::string release_index() { return "5"; }
    static std::string comparable(const std::string& q)
    {
        const auto& all = qualifiers();
        auto it = std::find(all.begin(), all.end(), q);
        if (it == all.end())
            return std::to_string(all.size()) + "-" + q;
        return std::to_string(it - all.begin());
    }

    std::string value_;
};

class ListItem final : public MavenItem {
public:
    Type type() const override { return List; }
    OrderKey key() const override
    {
        OrderKey k;
        k.kind = 1;
        for (const auto& i : items) {
            k.children.push_back(i->key());
            if (k.side == 0)
                k.side = k.children.back().side;
        }
        return k;
    }
    bool is_null() const override { return items.empty(); }
    int compare_to(const MavenItem* other) const override
    {
        if (!other) {
            for (const auto& i : items)
                if (int r = i->compare_to(nullptr))
                    return r;
            return 0;
        }
        if (other->type() == Int)
            return -1;
        if (other->type() == Str)
            return 1;
        const auto& rhs = static_cast<const ListItem*>(other)->items;
        for (std::size_t i = 0; i < std::max(items.size(), rhs.size()); ++i) {
            const MavenItem* l = i < items.size() ? items[i].get() : nullptr;
            const MavenItem* r = i < rhs.size() ? rhs[i].get() : nullptr;
            int result = l ? l->compare_to(r) : (r ? -r->compare_to(nullptr) : 0);
            if (result)
                return result;
        }
        return 0;
    }
    void normalize()
    {
        for (int i = static_cast<int>(items.size()) - 1; i >= 0; --i) {
            if (items[static_cast<std::size_t>(i)]->is_null())
                items.erase(items.begin() + i);
            else if (items[static_cast<std::size_t>(i)]->type() != List)
                break;
        }
    }

    std::vector<std::unique_ptr<MavenItem>> items;
};

class MavenVersion {
public:
    explicit MavenVersion(std::string text)
    {
        std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
        root_ = std::make_unique<ListItem>();
        ListItem* list = root_.get();
        std::vector<ListItem*> stack { list };
        auto push_list = [&] {
            auto child = std::make_unique<ListItem>();
            ListItem* raw = child.get();
            list->items.push_back(std::move(child));
            list = raw;
            stack.push_back(list);
        };
        auto parse_item = [](bool digit, const std::string& buf) -> std::unique_ptr<MavenItem> {
            if (digit)
                return std::make_unique<IntItem>(buf);
            return std::make_unique<StringItem>(buf, false);
        };
        bool digit = false;
        std::size_t start = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (c == '.' || c == '-') {
                if (i == start)
                    list->items.push_back(std::make_unique<IntItem>("0"));
                else
                    list->items.push_back(parse_item(digit, text.substr(start, i - start)));
                start = i + 1;
                if (c == '-')
                    push_list();
            } else if (c >= '0' && c <= '9') {
                if (!digit && i > start) {
                    list->items.push_back(std::make_unique<StringItem>(text.substr(start, i - start), true));
                    start = i;
                    push_list();
                }
                digit = true;
            } else {
                if (digit && i > start) {
                    list->items.push_back(parse_item(true, text.substr(start, i - start)));
                    start = i;
                    push_list();
                } else if (i == start && i > 0 && text[i - 1] == '.' && !list->items.empty()) {
                    // A string qualifier after '.' is treated as if it followed '-'.
                    push_list();
                }
                digit = false;
            }
        }
        if (text.size() > start)
            list->items.push_back(parse_item(digit, text.substr(start)));
        while (!stack.empty()) {
            stack.back()->normalize();
            stack.pop_back();
        }
    }

    int compare(const MavenVersion& o) const { return root_->compare_to(o.root_.get()); }
    OrderKey key() const { return root_->key(); }

private:
    std::unique_ptr<ListItem> root_;
};

inline int maven_compare(const std::string& a, const std::string& b)
{
    return MavenVersion(a).compare(MavenVersion(b));
}

// Maven's order with cross-kind comparisons made consistent with the
// comparison against a missing item, which keeps it transitive.
inline int consistent_compare(const std::string& a, const std::string& b)
{
    return compare_keys(MavenVersion(a).key(), MavenVersion(b).key());
}

} // namespace oracle
