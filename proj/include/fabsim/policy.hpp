#pragma once

// Endorsement policies: which combination of site endorsements a
// transaction needs before it may be ordered or committed.
//
// Grammar (keywords case-insensitive, labels case-sensitive, whitespace free):
//
//   expr      := AND '(' list ')' | OR '(' list ')' | OUTOF '(' int ',' list ')' | principal
//   list      := expr (',' expr)*
//   principal := '"' label '"' PEER

#include "fabsim/model.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fabsim {

class PolicyParseError : public std::runtime_error
{
public:
    PolicyParseError(std::size_t position, const std::string& message);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

struct Policy
{
    enum class Kind
    {
        principal,
        all_of,  // AND
        any_of,  // OR
        out_of,
    };

    Kind kind = Kind::principal;
    std::string site;  // principal only
    std::size_t threshold = 0;  // out_of only
    std::vector<Policy> children;

    static Policy principal(std::string site);
    static Policy all(std::vector<Policy> children);
    static Policy any(std::vector<Policy> children);
    static Policy out_of(std::size_t m, std::vector<Policy> children);

    friend bool operator==(const Policy&, const Policy&) = default;
};

using PeerSites = std::map<std::string, std::string>;

Policy parse_policy(std::string_view text);

/// Canonical text form; parse_policy(print_policy(p)) == p.
std::string print_policy(const Policy& policy);

/// Evaluates `policy` against endorsements. Invalid signatures count as absent,
/// and several endorsements from one peer count once.
bool evaluate(const Policy& policy, const std::vector<Endorsement>& endorsements, const PeerSites& peer_sites);

/// Every site label a principal in the tree names, sorted, without duplicates.
std::vector<std::string> principal_sites(const Policy& policy);

}  // namespace fabsim
