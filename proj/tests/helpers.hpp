#pragma once

#include <random>

#include "qshuttle/linalg.hpp"

namespace qtest {

using qshuttle::CMat;
using qshuttle::cplx;

// Random density matrix supported on the first `band` levels of each electron block.
inline CMat random_state(int n, unsigned seed, int band = -1, int block = 0) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd;
    CMat m = CMat::Zero(n, n);
    if (band < 0) band = block > 0 ? block : n;
    const int nb = block > 0 ? n / block : 1;
    const int bs = block > 0 ? block : n;
    for (int e = 0; e < nb; ++e)
        for (int f = 0; f < nb; ++f)
            for (int i = 0; i < band; ++i)
                for (int j = 0; j < band; ++j) m(e * bs + i, f * bs + j) = cplx(nd(g), nd(g));
    CMat rho = m * m.adjoint();
    rho /= rho.trace().real();
    return rho;
}

inline double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qtest
