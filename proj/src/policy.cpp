#include "fabsim/policy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace fabsim {

PolicyParseError::PolicyParseError(std::size_t position, const std::string& message)
    : std::runtime_error("policy: " + message + " at position " + std::to_string(position)), position_(position)
{
}

Policy Policy::principal(std::string site)
{
    Policy p;
    p.kind = Kind::principal;
    p.site = std::move(site);
    return p;
}

Policy Policy::all(std::vector<Policy> children)
{
    Policy p;
    p.kind = Kind::all_of;
    p.children = std::move(children);
    return p;
}

Policy Policy::any(std::vector<Policy> children)
{
    Policy p;
    p.kind = Kind::any_of;
    p.children = std::move(children);
    return p;
}

Policy Policy::out_of(std::size_t m, std::vector<Policy> children)
{
    if (m < 1 || m > children.size())
        throw std::invalid_argument("OutOf threshold must lie in [1, children]");
    Policy p;
    p.kind = Kind::out_of;
    p.threshold = m;
    p.children = std::move(children);
    return p;
}

namespace {

class Parser
{
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Policy parse()
    {
        skip_ws();
        if (at_end())
            throw PolicyParseError(pos_, "empty policy");
        auto p = expr();
        skip_ws();
        if (!at_end())
            throw PolicyParseError(pos_, "unexpected trailing input");
        return p;
    }

private:
    Policy expr()
    {
        skip_ws();
        if (at_end())
            throw PolicyParseError(pos_, "expected expression");
        if (text_[pos_] == '"')
            return principal();

        auto start = pos_;
        auto word = keyword();
        if (word.empty())
            throw PolicyParseError(pos_, std::string("unexpected character '") + text_[pos_] + "'");
        if (word == "and" || word == "or")
        {
            expect('(');
            auto children = list();
            expect(')');
            return word == "and" ? Policy::all(std::move(children)) : Policy::any(std::move(children));
        }
        if (word == "outof")
        {
            expect('(');
            skip_ws();
            auto num_pos = pos_;
            auto m = integer();
            expect(',');
            auto children = list();
            expect(')');
            if (m < 1 || m > children.size())
                throw PolicyParseError(num_pos, "OutOf threshold " + std::to_string(m) + " outside [1, " +
                                                    std::to_string(children.size()) + "]");
            return Policy::out_of(m, std::move(children));
        }
        throw PolicyParseError(start, "unknown keyword '" + word + "'");
    }

    std::vector<Policy> list()
    {
        std::vector<Policy> out;
        out.push_back(expr());
        skip_ws();
        while (!at_end() && text_[pos_] == ',')
        {
            ++pos_;
            out.push_back(expr());
            skip_ws();
        }
        return out;
    }

    Policy principal()
    {
        auto open = pos_++;
        auto close = text_.find('"', pos_);
        if (close == std::string_view::npos)
            throw PolicyParseError(open, "unterminated label");
        std::string label(text_.substr(pos_, close - pos_));
        if (label.empty())
            throw PolicyParseError(open, "empty label");
        pos_ = close + 1;
        skip_ws();
        auto kw_pos = pos_;
        if (keyword() != "peer")
            throw PolicyParseError(kw_pos, "expected 'peer' after label");
        return Policy::principal(std::move(label));
    }

    std::string keyword()
    {
        std::string word;
        while (!at_end() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text_[pos_++]))));
        return word;
    }

    std::size_t integer()
    {
        std::size_t value = 0;
        auto first = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), value);
        if (ec != std::errc{} || ptr == first)
            throw PolicyParseError(pos_, "expected integer");
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    void expect(char c)
    {
        skip_ws();
        if (at_end() || text_[pos_] != c)
            throw PolicyParseError(pos_, std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool at_end() const noexcept { return pos_ >= text_.size(); }

    std::string_view text_;
    std::size_t pos_ = 0;
};

bool eval_node(const Policy& p, const std::set<std::string>& sites)
{
    switch (p.kind)
    {
    case Policy::Kind::principal: return sites.contains(p.site);
    case Policy::Kind::all_of:
        return std::all_of(p.children.begin(), p.children.end(), [&](const Policy& c) { return eval_node(c, sites); });
    case Policy::Kind::any_of:
        return std::any_of(p.children.begin(), p.children.end(), [&](const Policy& c) { return eval_node(c, sites); });
    case Policy::Kind::out_of:
    {
        auto n = std::count_if(p.children.begin(), p.children.end(), [&](const Policy& c) { return eval_node(c, sites); });
        return static_cast<std::size_t>(n) >= p.threshold;
    }
    }
    return false;
}

void print_node(const Policy& p, std::string& out)
{
    auto children = [&] {
        for (std::size_t i = 0; i < p.children.size(); ++i)
        {
            if (i > 0)
                out += ", ";
            print_node(p.children[i], out);
        }
    };
    switch (p.kind)
    {
    case Policy::Kind::principal: out += '"' + p.site + "\" peer"; return;
    case Policy::Kind::all_of: out += "AND("; break;
    case Policy::Kind::any_of: out += "OR("; break;
    case Policy::Kind::out_of: out += "OUTOF(" + std::to_string(p.threshold) + ", "; break;
    }
    children();
    out += ')';
}

void collect_sites(const Policy& p, std::set<std::string>& out)
{
    if (p.kind == Policy::Kind::principal)
        out.insert(p.site);
    for (const auto& c : p.children)
        collect_sites(c, out);
}

}  // namespace

Policy parse_policy(std::string_view text)
{
    return Parser(text).parse();
}

std::string print_policy(const Policy& policy)
{
    std::string out;
    print_node(policy, out);
    return out;
}

bool evaluate(const Policy& policy, const std::vector<Endorsement>& endorsements, const PeerSites& peer_sites)
{
    // A site is satisfied by any one valid endorsement from a peer located there,
    // so deduplicating by peer falls out of working on the set of sites.
    std::set<std::string> sites;
    for (const auto& e : endorsements)
    {
        if (!e.signature_valid)
            continue;
        if (auto it = peer_sites.find(e.endorser_id); it != peer_sites.end())
            sites.insert(it->second);
    }
    return eval_node(policy, sites);
}

std::vector<std::string> principal_sites(const Policy& policy)
{
    std::set<std::string> sites;
    collect_sites(policy, sites);
    return {sites.begin(), sites.end()};
}

}  // namespace fabsim
