#pragma once

#include <algorithm>

#include "o2hopf/spectral/operator.hpp"

namespace o2hopf::spectral {

struct Region {
    double re_min = -1e300, re_max = 1e300;
    double im_min = -1e300, im_max = 1e300;
    bool contains(Complex z) const {
        return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min &&
               z.imag() <= im_max;
    }
    bool empty() const { return re_min > re_max || im_min > im_max; }
};

struct EigenPair {
    Complex lambda;
    CVec vec;  // interior nodes
    double residual = 0.0;
};

inline double eigen_residual(const OperatorMatrix& op, Complex lambda, const CVec& v) {
    return (op.A * v - lambda * v).norm() / v.norm();
}

// dense eigensolve filtered to a rectangle, sorted by real part descending
inline std::vector<EigenPair> spectrum_in_region(const OperatorMatrix& op, const Region& region,
                                                 double residual_tol = 1e-8) {
    std::vector<EigenPair> out;
    if (region.empty()) return out;
    Eigen::ComplexEigenSolver<CMat> es(op.A);
    if (es.info() != Eigen::Success) throw SolverFailure("dense eigensolve failed");
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
        const Complex lam = es.eigenvalues()[j];
        if (!region.contains(lam)) continue;
        EigenPair p;
        p.lambda = lam;
        p.vec = es.eigenvectors().col(j);
        p.residual = eigen_residual(op, lam, p.vec);
        if (p.residual > residual_tol)
            throw SolverFailure("eigenpair residual " + std::to_string(p.residual));
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(),
              [](const EigenPair& a, const EigenPair& b) { return a.lambda.real() > b.lambda.real(); });
    return out;
}

// rightmost eigenvalue of the dense operator
inline EigenPair rightmost_eigenvalue(const OperatorMatrix& op) {
    auto all = spectrum_in_region(op, Region{}, 1e-6);
    if (all.empty()) throw SolverFailure("empty spectrum");
    return all.front();
}

inline CVec block_apply(const OperatorBlocks& B, const CVec& x) {
    CVec y(x.size());
    for (int j = 0; j < B.m; ++j) {
        y.segment(j * B.n, B.n) = B.diag[j] * x.segment(j * B.n, B.n);
        if (j > 0) y.segment(j * B.n, B.n) += B.sub[j] * x.segment((j - 1) * B.n, B.n);
        if (j + 1 < B.m) y.segment(j * B.n, B.n) += B.sup[j] * x.segment((j + 1) * B.n, B.n);
    }
    return y;
}

// Rayleigh-quotient inverse iteration for the eigenvalue nearest the shift;
// scales to fine grids through the block-tridiagonal solver.
inline EigenPair eigen_nearest(const RhsContext& ctx, int k, Complex shift, int max_iter = 30,
                               double tol = 1e-12, const CVec* seed = nullptr) {
    const OperatorBlocks B = assemble_blocks(ctx, k);
    const int d = B.n * B.m;
    double opscale = 1.0;
    for (const auto& D : B.diag) opscale = std::max(opscale, D.cwiseAbs().maxCoeff());
    CVec x;
    if (seed && seed->size() == d)
        x = *seed;
    else {
        x = CVec::Ones(d);
        for (int i = 0; i < d; ++i) x[i] += Complex(0.0, 1e-3 * ((i * 2654435761u) % 97) / 97.0);
    }
    x.normalize();
    Complex mu = shift;
    std::unique_ptr<BlockTridiagLU> lu = std::make_unique<BlockTridiagLU>(B, mu);
    double res = 1e300;
    for (int it = 0; it < max_iter; ++it) {
        CVec y = x;
        lu->solve(y);
        const double ny = y.norm();
        if (!std::isfinite(ny) || ny == 0.0) throw SolverFailure("inverse iteration breakdown");
        x = y / ny;
        const CVec Ax = block_apply(B, x);
        const Complex rq = x.dot(Ax);  // Eigen dot conjugates the left argument
        res = (Ax - rq * x).norm();
        if (res < tol * std::max(1.0, std::abs(rq)) + 1e-14 * opscale) {
            EigenPair p;
            p.lambda = rq;
            p.vec = x;
            p.residual = res;
            return p;
        }
        if (std::abs(rq - mu) > 1e-10 * (1.0 + std::abs(rq))) {
            mu = rq;
            lu = std::make_unique<BlockTridiagLU>(B, mu);
        }
    }
    throw SolverFailure("inverse iteration stalled at residual " + std::to_string(res));
}

}  // namespace o2hopf::spectral
