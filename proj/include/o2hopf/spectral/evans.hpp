#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>

#include "o2hopf/spectral/eigen.hpp"

namespace o2hopf::spectral {

namespace exterior {

// lexicographic m-subsets of {0..N-1}
inline std::vector<std::vector<int>> subsets(int N, int m) {
    std::vector<std::vector<int>> out;
    std::vector<int> c(m);
    std::iota(c.begin(), c.end(), 0);
    for (;;) {
        out.push_back(c);
        int i = m - 1;
        while (i >= 0 && c[i] == N - m + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < m; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

// m-th exterior power with a precomputed transition table
struct ExteriorSpace {
    int N = 0, m = 0;
    std::vector<std::vector<int>> S;
    struct Move {
        int s, t, from, to, sign;
    };
    std::vector<Move> moves;  // off-diagonal single-index replacements

    ExteriorSpace(int N_, int m_) : N(N_), m(m_), S(subsets(N_, m_)) {
        std::map<std::vector<int>, int> index;
        for (std::size_t i = 0; i < S.size(); ++i) index[S[i]] = int(i);
        for (std::size_t s = 0; s < S.size(); ++s)
            for (int pos = 0; pos < m; ++pos) {
                const int from = S[s][pos];
                for (int to = 0; to < N; ++to) {
                    if (to == from) continue;
                    bool dup = false;
                    for (int q = 0; q < m; ++q)
                        if (q != pos && S[s][q] == to) dup = true;
                    if (dup) continue;
                    std::vector<int> t = S[s];
                    t[pos] = to;
                    int sign = 1;
                    for (int a = 0; a < m; ++a)
                        for (int b = a + 1; b < m; ++b)
                            if (t[a] > t[b]) {
                                std::swap(t[a], t[b]);
                                sign = -sign;
                            }
                    moves.push_back({int(s), index[t], from, to, sign});
                }
            }
    }

    // w -> A^{(m)} w
    CVec apply(const CMat& A, const CVec& w) const {
        CVec out(S.size());
        for (std::size_t s = 0; s < S.size(); ++s) {
            Complex diag(0, 0);
            for (int i : S[s]) diag += A(i, i);
            out[s] = diag * w[s];
        }
        for (const Move& mv : moves)
            out[mv.t] += double(mv.sign) * A(mv.to, mv.from) * w[mv.s];
        return out;
    }
};

// Pluecker coordinates of the column span of an N x m frame
inline CVec wedge(const CMat& frame, const std::vector<std::vector<int>>& S) {
    const int m = int(frame.cols());
    CVec w(S.size());
    for (std::size_t s = 0; s < S.size(); ++s) {
        CMat minor(m, m);
        for (int a = 0; a < m; ++a) minor.row(a) = frame.row(S[s][a]);
        w[s] = minor.determinant();
    }
    return w;
}

// sign of the permutation (S, complement(S)) of {0..N-1}
inline int complement_sign(const std::vector<int>& S, int N) {
    std::vector<int> perm = S;
    for (int i = 0; i < N; ++i)
        if (std::find(S.begin(), S.end(), i) == S.end()) perm.push_back(i);
    int sign = 1;
    for (std::size_t a = 0; a < perm.size(); ++a)
        for (std::size_t b = a + 1; b < perm.size(); ++b)
            if (perm[a] > perm[b]) sign = -sign;
    return sign;
}

}  // namespace exterior

struct EvansOptions {
    double rtol = 1e-10;
    double atol = 1e-13;
    int max_steps = 200000;
    int renorm_every = 10;
    double split_tol = 1e-8;
};

// First-order formulation of (lambda - L_k) v = 0 in the variables
// Y = (v_h, v_p, z) with z the parabolic flux; dimension n + r.
class EvansSystem {
  public:
    EvansSystem(const pde::ModelSystem& model, double eps, int k, Complex lambda)
        : model_(&model), eps_(eps), k_(k), lambda_(lambda) {
        n_ = model.n();
        r_ = model.r();
        nh_ = n_ - r_;
        const Vec um = model.endstate(eps, -1);
        B11_ = model.visc(1, 1, eps, um);
        B12_ = model.visc(1, 2, eps, um);
        B21_ = model.visc(2, 1, eps, um);
        B22_ = model.visc(2, 2, eps, um);
        binv_ = B11_.bottomRightCorner(r_, r_).inverse();
        if (nh_ > 0) {
            const Mat A1 = model.dflux(1, eps, um);
            Phh_ = A1.topLeftCorner(nh_, nh_);
            Php_ = A1.topRightCorner(nh_, r_);
            Phh_inv_ = Phh_.inverse();
        }
    }

    int dim() const { return n_ + r_; }
    Complex lambda() const { return lambda_; }

    // coefficient matrix of Y' = A(x) Y
    CMat coefficient(double x) const {
        const Vec u = profile_state(x);
        const Mat A1 = model_->dflux(1, eps_, u);
        const Mat A2 = model_->dflux(2, eps_, u);
        const Mat C = model_->has_source() ? model_->dsource(eps_, x, u) : Mat::Zero(n_, n_);
        const Complex ik(0.0, double(k_));
        const int N = dim();
        CMat A(N, N);
        for (int col = 0; col < N; ++col) {
            CVec Y = CVec::Zero(N);
            Y[col] = 1.0;
            const CVec v = Y.head(n_);
            const CVec z = Y.tail(r_);
            // v_p' from the flux variable
            CVec vp_p = binv_ * (z + (A1 * v).tail(r_) - ik * (B12_ * v).tail(r_));
            CVec vh_p(nh_);
            if (nh_ > 0)
                vh_p = Phh_inv_ *
                       (-lambda_ * v.head(nh_) - ik * (A2 * v).head(nh_) + (C * v).head(nh_) -
                        Php_ * vp_p);
            CVec zp = lambda_ * v.tail(r_) + double(k_ * k_) * (B22_ * v).tail(r_) +
                      ik * (A2 * v).tail(r_) - (C * v).tail(r_) -
                      ik * (B21_.bottomRightCorner(r_, r_) * vp_p);
            CVec out(N);
            out.head(nh_) = vh_p;
            out.segment(nh_, r_) = vp_p;
            out.tail(r_) = zp;
            A.col(col) = out;
        }
        return A;
    }

    CMat endstate_coefficient(int side) const {
        return coefficient(side < 0 ? -1e6 : 1e6);  // profile saturates at the endstates
    }

  private:
    Vec profile_state(double x) const {
        if (!model_->has_exact_profile())
            throw InvalidInput("Evans evaluation needs a closed-form profile for this model");
        return model_->exact_profile_state(eps_, x);
    }

    const pde::ModelSystem* model_;
    double eps_;
    int k_;
    Complex lambda_;
    int n_, r_, nh_;
    Mat B11_, B12_, B21_, B22_, binv_, Phh_, Php_, Phh_inv_;
};

namespace detail {

// Dormand-Prince 5(4) with power-of-two renormalization
template <class F>
void rk45(const F& f, CVec& y, double x0, double x1, const EvansOptions& opts) {
    static const double c[7] = {0, 1. / 5, 3. / 10, 4. / 5, 8. / 9, 1., 1.};
    static const double a[7][6] = {
        {},
        {1. / 5},
        {3. / 40, 9. / 40},
        {44. / 45, -56. / 15, 32. / 9},
        {19372. / 6561, -25360. / 2187, 64448. / 6561, -212. / 729},
        {9017. / 3168, -355. / 33, 46732. / 5247, 49. / 176, -5103. / 18656},
        {35. / 384, 0., 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84}};
    static const double b5[7] = {35. / 384, 0., 500. / 1113, 125. / 192, -2187. / 6784,
                                 11. / 84, 0.};
    static const double b4[7] = {5179. / 57600,    0.,           7571. / 16695, 393. / 640,
                                 -92097. / 339200, 187. / 2100, 1. / 40};
    const double dir = x1 > x0 ? 1.0 : -1.0;
    double x = x0;
    double hstep = dir * std::min(0.1, std::abs(x1 - x0) / 10.0);
    int accepted = 0;
    for (int step = 0; step < opts.max_steps; ++step) {
        if (dir * (x - x1) >= 0.0) return;
        if (dir * (x + hstep - x1) > 0.0) hstep = x1 - x;
        CVec k[7];
        k[0] = f(x, y);
        for (int s = 1; s < 7; ++s) {
            CVec ys = y;
            for (int j = 0; j < s; ++j) ys += hstep * a[s][j] * k[j];
            k[s] = f(x + c[s] * hstep, ys);
        }
        CVec y5 = y, y4 = y;
        for (int s = 0; s < 7; ++s) {
            y5 += hstep * b5[s] * k[s];
            y4 += hstep * b4[s] * k[s];
        }
        const double err = (y5 - y4).norm();
        const double tol = opts.atol + opts.rtol * y5.norm();
        if (err <= tol) {
            x += hstep;
            y = y5;
            if (++accepted % opts.renorm_every == 0) {
                const double nrm = y.norm();
                if (nrm > 0.0) {
                    const double scale = std::exp2(-std::round(std::log2(nrm)));
                    y *= scale;  // exact power-of-two rescale
                }
            }
        }
        const double factor =
            err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
        hstep *= std::min(4.0, std::max(0.2, factor));
        if (std::abs(hstep) < 1e-14)
            throw StiffnessFailure("Evans integrator step collapsed");
    }
    throw StiffnessFailure("Evans integrator exceeded the step budget");
}

struct Cluster {
    std::vector<Complex> mus;
    CMat frame;     // dim x m
    Complex trace;  // sum of cluster eigenvalues, used as integration gauge
    std::vector<int> ref_cols;  // frozen reference columns along a sweep
};

// eigenvalue cluster of A selected by predicate or by continuation from a
// previous cluster (greedy nearest matching)
inline Cluster select_cluster(const CMat& A, int m, bool unstable, const Cluster* prev,
                              double split_tol) {
    Eigen::ComplexEigenSolver<CMat> es(A);
    const int N = int(A.rows());
    std::vector<int> pick;
    if (prev == nullptr) {
        for (int i = 0; i < N; ++i) {
            const double re = es.eigenvalues()[i].real();
            if (std::abs(re) < split_tol)
                throw SplittingFailure("endstate eigenvalue at distance " +
                                       std::to_string(std::abs(re)) +
                                       " from the imaginary axis");
            if ((unstable && re > 0) || (!unstable && re < 0)) pick.push_back(i);
        }
        if (int(pick.size()) != m)
            throw SplittingFailure("consistent splitting violated: got " +
                                   std::to_string(pick.size()) + " of " + std::to_string(m));
    } else {
        std::vector<bool> used(N, false);
        for (const Complex& target : prev->mus) {
            int best = -1;
            double dbest = 1e300;
            for (int i = 0; i < N; ++i) {
                if (used[i]) continue;
                const double d = std::abs(es.eigenvalues()[i] - target);
                if (d < dbest) {
                    dbest = d;
                    best = i;
                }
            }
            used[best] = true;
            pick.push_back(best);
        }
    }
    Cluster cl;
    cl.trace = Complex(0, 0);
    for (int i : pick) {
        cl.mus.push_back(es.eigenvalues()[i]);
        cl.trace += es.eigenvalues()[i];
    }
    // analytic frame: spectral projector applied to fixed real reference columns
    CMat P = CMat::Zero(N, N);
    CMat V = es.eigenvectors();
    CMat Vinv = V.inverse();
    for (int i : pick) P += V.col(i) * Vinv.row(i);
    cl.frame.resize(N, m);
    if (prev && prev->frame.size() > 0) {
        // parallel transport of the previous frame; for analytic projectors
        // the holonomy of this transport vanishes with the step size
        cl.frame = P * prev->frame;
        for (int j = 0; j < m; ++j) {
            const double nrm = cl.frame.col(j).norm();
            if (nrm < 1e-8)
                throw ContourTooCoarse("transported Evans frame degenerated");
            cl.frame.col(j) /= nrm;  // real positive scaling keeps phases
        }
    } else {
        // deterministic reference columns: walk the m-subsets by projected
        // volume until the projected frame has full rank
        const auto cand = exterior::subsets(N, m);
        double best = -1.0;
        for (const auto& pickc : cand) {
            CMat F(N, m);
            for (int j = 0; j < m; ++j) F.col(j) = P.col(pickc[j]);
            const double vol = std::abs(Eigen::JacobiSVD<CMat>(F).singularValues().prod());
            if (vol > best) {
                best = vol;
                cl.ref_cols = pickc;
                cl.frame = F;
            }
        }
        if (best < 1e-12)
            throw SolverFailure("no nondegenerate Evans reference frame");
        for (int j = 0; j < m; ++j) cl.frame.col(j) /= cl.frame.col(j).norm();
    }
    return cl;
}

}  // namespace detail

struct EvansValue {
    Complex D;       // scale-free normalized value
    int n_unstable;  // dimension counts used
    int n_stable;
};

class EvansEvaluator {
  public:
    EvansEvaluator(const pde::ModelSystem& model, double eps, int k, double L,
                   EvansOptions opts = {})
        : model_(&model), eps_(eps), k_(k), L_(L), opts_(opts) {}

    // single-point evaluation with sign-selected clusters (needs consistent
    // splitting); the contour sweep below continues clusters instead
    EvansValue evaluate(Complex lambda) const {
        detail::Cluster none;
        return evaluate_with(lambda, nullptr, nullptr, &none, &none, false);
    }

    // evaluation continuing the endstate clusters from a previous contour
    // point; cl_minus/cl_plus are updated in place
    EvansValue evaluate_continued(Complex lambda, detail::Cluster& cl_minus,
                                  detail::Cluster& cl_plus, bool first) const {
        return evaluate_with(lambda, first ? nullptr : &cl_minus, first ? nullptr : &cl_plus,
                             &cl_minus, &cl_plus, true);
    }

  private:
    EvansValue evaluate_with(Complex lambda, const detail::Cluster* prev_m,
                             const detail::Cluster* prev_p, detail::Cluster* out_m,
                             detail::Cluster* out_p, bool store) const {
        EvansSystem sys(*model_, eps_, k_, lambda);
        const int N = sys.dim();
        const CMat Am = sys.endstate_coefficient(-1);
        const CMat Ap = sys.endstate_coefficient(+1);

        // dimension counts from the sign-based split at a reference point
        Eigen::ComplexEigenSolver<CMat> esm(Am);
        int nu = 0;
        for (int i = 0; i < N; ++i)
            if (esm.eigenvalues()[i].real() > 0) ++nu;
        if (prev_m) nu = int(prev_m->mus.size());
        int ns = N - nu;

        detail::Cluster cm = detail::select_cluster(Am, nu, true, prev_m, opts_.split_tol);
        detail::Cluster cp = detail::select_cluster(Ap, ns, false, prev_p, opts_.split_tol);

        if (!ext_u_ || ext_u_->m != nu) ext_u_ = std::make_unique<exterior::ExteriorSpace>(N, nu);
        if (!ext_s_ || ext_s_->m != ns) ext_s_ = std::make_unique<exterior::ExteriorSpace>(N, ns);
        const auto& Su = ext_u_->S;
        const auto& Ss = ext_s_->S;

        CVec om = exterior::wedge(cm.frame, Su);
        CVec op = exterior::wedge(cp.frame, Ss);
        const double nm0 = om.norm(), np0 = op.norm();
        if (nm0 < 1e-13 || np0 < 1e-13)
            throw SolverFailure("degenerate Evans initialization frame");
        om /= nm0;
        op /= np0;

        auto fm = [&](double x, const CVec& w) -> CVec {
            return ext_u_->apply(sys.coefficient(x), w) - cm.trace * w;
        };
        auto fp = [&](double x, const CVec& w) -> CVec {
            return ext_s_->apply(sys.coefficient(x), w) - cp.trace * w;
        };
        detail::rk45(fm, om, -L_, 0.0, opts_);
        detail::rk45(fp, op, L_, 0.0, opts_);

        Complex pair(0, 0);
        for (std::size_t s = 0; s < Su.size(); ++s) {
            // complementary index of Su[s] within Ss
            std::vector<int> comp;
            for (int i = 0; i < N; ++i)
                if (std::find(Su[s].begin(), Su[s].end(), i) == Su[s].end()) comp.push_back(i);
            const auto it = std::find(Ss.begin(), Ss.end(), comp);
            const int sign = exterior::complement_sign(Su[s], N);
            pair += double(sign) * om[s] * op[it - Ss.begin()];
        }
        EvansValue out;
        out.D = pair / (om.norm() * op.norm());
        out.n_unstable = nu;
        out.n_stable = ns;
        if (store) {
            *out_m = cm;
            *out_p = cp;
        }
        return out;
    }

    const pde::ModelSystem* model_;
    double eps_;
    int k_;
    double L_;
    EvansOptions opts_;
    mutable std::unique_ptr<exterior::ExteriorSpace> ext_u_, ext_s_;
};

inline Complex evans_evaluate(const pde::ModelSystem& model, double eps, Complex lambda, int k,
                              double L, EvansOptions opts = {}) {
    return EvansEvaluator(model, eps, k, L, opts).evaluate(lambda).D;
}

// winding number of D along a closed polyline, with adaptive refinement of
// the contour until the turning per segment is below pi/4
inline int evans_root_count(const pde::ModelSystem& model, double eps,
                            std::vector<Complex> contour, int k, double L,
                            EvansOptions opts = {}, int max_refine = 12) {
    if (contour.size() < 3) throw InvalidInput("contour needs at least 3 vertices");
    if (contour.front() != contour.back()) contour.push_back(contour.front());
    EvansEvaluator ev(model, eps, k, L, opts);

    for (int round = 0;; ++round) {
        // sweep with cluster continuation
        std::vector<Complex> D(contour.size());
        detail::Cluster cm, cp;
        bool degraded = false;
        for (std::size_t i = 0; i < contour.size(); ++i) {
            try {
                D[i] = ev.evaluate_continued(contour[i], cm, cp, i == 0).D;
            } catch (const ContourTooCoarse&) {
                degraded = true;
                break;
            }
        }
        if (degraded) {
            if (round >= max_refine) throw ContourTooCoarse("refinement cap reached");
            std::vector<Complex> refined;
            for (std::size_t i = 0; i + 1 < contour.size(); ++i) {
                refined.push_back(contour[i]);
                refined.push_back(0.5 * (contour[i] + contour[i + 1]));
            }
            refined.push_back(contour.back());
            contour = std::move(refined);
            continue;
        }

        double dmax = 0.0;
        for (const Complex& d : D) dmax = std::max(dmax, std::abs(d));
        for (const Complex& d : D)
            if (std::abs(d) < 1e-8 * dmax)
                throw RootOnContour("|D| dip to " + std::to_string(std::abs(d)));

        bool fine = true;
        double total = 0.0;
        std::vector<Complex> refined{contour.front()};
        for (std::size_t i = 0; i + 1 < contour.size(); ++i) {
            const double darg = std::arg(D[i + 1] / D[i]);
            total += darg;
            if (std::abs(darg) > pi / 4.0) {
                fine = false;
                refined.push_back(0.5 * (contour[i] + contour[i + 1]));
            }
            refined.push_back(contour[i + 1]);
        }
        if (fine) {
            const double w = total / (2.0 * pi);
            const int wi = int(std::lround(w));
            if (std::abs(w - wi) > 0.25)
                throw ContourTooCoarse("non-integer winding " + std::to_string(w));
            return wi;
        }
        if (round >= max_refine) throw ContourTooCoarse("refinement cap reached");
        contour = std::move(refined);
    }
}

}  // namespace o2hopf::spectral
