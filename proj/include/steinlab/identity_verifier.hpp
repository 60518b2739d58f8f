#pragma once

#include <string>
#include <vector>

#include "steinlab/json_io.hpp"
#include "steinlab/rational.hpp"

namespace steinlab {

// pass iff computed == expected exactly.
struct IdentityResult {
  std::string id;
  Json parameters;
  Rational computed;
  Rational expected;
  bool pass = false;

  Json to_json() const;
};

// 2^{l-1} sum_{k,m} (-1)^{k+m} (2l-2k-2m-3)!! / 2^{l-k-m-1} (l-1)!
//   / (4^{k+m} k! m! (l-1-2k)! (l-1-2m)!), expected 1. Odd ell >= 1 only.
IdentityResult appendix_sum(int ell);

// The same double sum without the (l-1)! factor, evaluated through exact
// Gamma values at half-integers; expected 1/(l-1)!.
IdentityResult claim_check(int ell);

// sum_m (-1)^m (4p-2k-2m)! / (m! (2p-2m)! (2p-k-m)!), expected 2^{2p} when
// k = 0 and 0 otherwise. Requires 0 <= k <= p.
IdentityResult hypergeom_inner_sum(int p, int k);

// (4p-2k)! / ((2p)! (2p-k)!) (k-p)_p (-2)^p / ((4p-2k-1)!! / (2p-2k-1)!!),
// the shifted-factorial closed form of hypergeom_inner_sum.
Rational hypergeom_closed_form(int p, int k);

// sum_{k<=n} (-n)_k (-b)_k / ((c)_k k!) against (c+b)_n / (c)_n. b and c must
// be integers or half-integers; c may not lie in {0, -1, ..., -(n-1)}.
IdentityResult chu_vandermonde(int n, const Rational& b, const Rational& c);

// Every identity for odd ell <= max_ell and p <= max_p, in a fixed order.
std::vector<IdentityResult> all_identities(int max_ell, int max_p);

}  // namespace steinlab
