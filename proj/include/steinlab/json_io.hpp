#pragma once

#include <json.hpp>

#include "steinlab/eigenfunctions.hpp"
#include "steinlab/rational.hpp"
#include "steinlab/sphere_moments.hpp"

namespace steinlab {

using Json = nlohmann::ordered_json;

// {"num": "<decimal>", "den": "<decimal>"}
Json rational_to_json(const Rational& x);
// Accepts the object form, a JSON integer, or a string "p" / "p/q".
// Throws std::invalid_argument otherwise (floats are rejected).
Rational rational_from_json(const Json& j);

Json rational_vector_to_json(const RationalVector& v);
RationalVector rational_vector_from_json(const Json& j);

// {"dimension": n, "terms": [{"exponents": [[var, exp], ...], "coefficient": {...}}, ...]}
Json polynomial_to_json(const SpherePolynomial& p);
SpherePolynomial polynomial_from_json(const Json& j);

// Family-tagged spec records:
//   {"family": "quadratic", "d": [...]}  or  {"family": "quadratic", "matrix": [[...]]}
//   {"family": "gegenbauer", "n": n, "ell": l, "a": [...]}
//   {"family": "torus", "B": [[...]] (default identity, needs "n"), "V": [[...]], "a": [...]}
// Gegenbauer coefficients are exact when every entry is an integer, string or
// {num, den} object, and floating otherwise. Throws std::invalid_argument on
// malformed input.
Json spec_to_json(const EigenfunctionSpec& spec);
EigenfunctionSpec spec_from_json(const Json& j);

}  // namespace steinlab
