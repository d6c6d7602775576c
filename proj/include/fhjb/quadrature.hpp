#pragma once
#include <vector>

namespace fhjb {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes/weights computed once per order and cached (Newton on the Legendre
// recurrence, accurate to machine precision for the orders used here).
const GaussRule& gauss_rule(int n);

}  // namespace fhjb
