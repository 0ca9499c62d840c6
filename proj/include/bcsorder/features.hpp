#pragma once

#include <string>
#include <vector>

#include "bcsorder/anf.hpp"
#include "bcsorder/ordering.hpp"

namespace bcsorder {

/// Normalized per-variable occurrence frequencies of a system. An
/// occurrence of x_i is one monomial (counted per polynomial) whose
/// support contains x_i. Sums to 1 unless the system has no variable
/// occurrences, in which case it is all zero.
using Spectrum = std::vector<double>;

Spectrum spectrum(const BoolSystem& s);

/// Renames every x_i to x_{o.position(i)}.
BoolSystem apply_ordering(const BoolSystem& s, const Ordering& o);

/// Moves entry i of a per-variable vector to slot o.position(i).
Spectrum permute_spectrum(const Spectrum& freq, const Ordering& o);

/// Maps an assignment of the renamed system back to the original variables.
Assignment pull_back(Assignment renamed, const Ordering& o);

std::string spectrum_to_json(const Spectrum& s);

}  // namespace bcsorder
