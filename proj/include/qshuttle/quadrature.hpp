#pragma once

#include <vector>

namespace qshuttle {

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule mapped to [a, b].
Quadrature gauss_legendre(int n, double a, double b);

}  // namespace qshuttle
