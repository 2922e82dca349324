#pragma once

#include "o2hopf/pde/rhs.hpp"

namespace o2hopf::spectral {

using pde::RhsContext;

// Interior-node block-tridiagonal stencil of the mode-k linearized operator
//   L_k = d1(B11 d1 .) + ik(B12+B21) d1 - k^2 B22 - d1(A1bar .) - ik A2bar + Cbar
// with homogeneous Dirichlet closure at |x1| = L.
struct OperatorBlocks {
    int k = 0;
    int n = 0, m = 0;  // m = interior node count
    std::vector<CMat> sub, diag, sup;
};

inline OperatorBlocks assemble_blocks(const RhsContext& ctx, int k) {
    const int n = ctx.n(), N = ctx.N();
    const double h = ctx.h(), h2 = h * h;
    const Complex ik(0.0, double(k));
    OperatorBlocks B;
    B.k = k;
    B.n = n;
    B.m = N - 2;
    B.sub.resize(B.m);
    B.diag.resize(B.m);
    B.sup.resize(B.m);
    const int nh = ctx.model->n() - ctx.model->r();
    CMat dis = CMat::Zero(n, n);
    for (int c = 0; c < nh; ++c) dis(c, c) = ctx.hyp_dissipation;
    for (int j = 0; j < B.m; ++j) {
        const int i = j + 1;
        B.diag[j] = (-2.0 / h2) * ctx.B11.cast<Complex>() -
                    double(k * k) * ctx.B22.cast<Complex>() - ik * ctx.A2bar[i].cast<Complex>() +
                    ctx.Cbar[i].cast<Complex>() - 2.0 * dis;
        B.sup[j] = (1.0 / h2) * ctx.B11.cast<Complex>() + (ik / (2.0 * h)) * ctx.Bmix.cast<Complex>() -
                   (1.0 / (2.0 * h)) * ctx.A1bar[i + 1].cast<Complex>() + dis;
        B.sub[j] = (1.0 / h2) * ctx.B11.cast<Complex>() - (ik / (2.0 * h)) * ctx.Bmix.cast<Complex>() +
                   (1.0 / (2.0 * h)) * ctx.A1bar[i - 1].cast<Complex>() + dis;
    }
    return B;
}

struct OperatorMatrix {
    int k = 0;
    double eps = 0.0;
    int n = 0, N1 = 0;
    double h = 0.0;
    CMat A;  // dense on interior nodes, size n*(N1-2)
};

inline OperatorMatrix assemble_Lk(const RhsContext& ctx, int k) {
    const OperatorBlocks B = assemble_blocks(ctx, k);
    OperatorMatrix op;
    op.k = k;
    op.eps = ctx.eps;
    op.n = B.n;
    op.N1 = ctx.N();
    op.h = ctx.h();
    const int d = B.n * B.m;
    op.A = CMat::Zero(d, d);
    for (int j = 0; j < B.m; ++j) {
        op.A.block(j * B.n, j * B.n, B.n, B.n) = B.diag[j];
        if (j + 1 < B.m) op.A.block(j * B.n, (j + 1) * B.n, B.n, B.n) = B.sup[j];
        if (j > 0) op.A.block(j * B.n, (j - 1) * B.n, B.n, B.n) = B.sub[j];
    }
    return op;
}

// interior vector <-> full mode matrix (zero boundary columns)
inline CVec mode_to_interior(const CMat& vk) {
    const int n = int(vk.rows()), N = int(vk.cols());
    CVec x(n * (N - 2));
    for (int j = 0; j < N - 2; ++j) x.segment(j * n, n) = vk.col(j + 1);
    return x;
}

inline CMat interior_to_mode(const CVec& x, int n, int N1) {
    CMat vk = CMat::Zero(n, N1);
    for (int j = 0; j < N1 - 2; ++j) vk.col(j + 1) = x.segment(j * n, n);
    return vk;
}

// complex block-tridiagonal LU without inter-block pivoting
class BlockTridiagLU {
  public:
    BlockTridiagLU(const OperatorBlocks& B, Complex shift) : n_(B.n), m_(B.m) {
        fac_.resize(m_);
        sub_.resize(m_);
        sup_ = B.sup;
        for (int j = 0; j < m_; ++j) {
            CMat D = B.diag[j] - shift * CMat::Identity(n_, n_);
            if (j > 0) {
                sub_[j] = B.sub[j] * fac_[j - 1].inverse();
                D -= sub_[j] * B.sup[j - 1];
            }
            fac_[j] = D;
            lu_.emplace_back(D);
        }
    }

    // solves (L_k - shift I) x = b in place
    void solve(CVec& b) const {
        for (int j = 1; j < m_; ++j)
            b.segment(j * n_, n_) -= sub_[j] * b.segment((j - 1) * n_, n_);
        b.segment((m_ - 1) * n_, n_) = lu_[m_ - 1].solve(b.segment((m_ - 1) * n_, n_));
        for (int j = m_ - 2; j >= 0; --j) {
            CVec rhs = b.segment(j * n_, n_) - sup_[j] * b.segment((j + 1) * n_, n_);
            b.segment(j * n_, n_) = lu_[j].solve(rhs);
        }
    }

  private:
    int n_, m_;
    std::vector<CMat> fac_, sub_, sup_;
    std::vector<Eigen::PartialPivLU<CMat>> lu_;
};

}  // namespace o2hopf::spectral
