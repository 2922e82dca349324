#pragma once

#include <optional>

#include "o2hopf/common.hpp"

namespace o2hopf::reduction {

// Six-dimensional ground-truth system: the O(2) Hopf pair (z1, z2) with
// prescribed displacement-level coefficients plus one strongly damped
// complex mode zeta forced quadratically and fed back into the pair. The
// closed-form slaving shift of Gamma is absorbed at construction, so the
// reduction pipeline must reproduce the targets exactly up to its own
// quadrature and fit error.
class SyntheticSystem {
  public:
    using State = Eigen::Matrix<double, 6, 1>;

    struct Params {
        double gamma_prime = 1.0 / (2.0 * pi);
        double omega0 = 1.0, omega1 = 0.1;
        Complex Lambda_hat{}, Gamma_hat{};  // ODE-level cubic coefficients
        double rho = 1.2;
        Complex eta{0.8, 0.2};
        Complex feedback{0.5, -0.1};
        double dt = 2e-3;
        double guard = 10.0;
    };

    // prescribe the displacement-map coefficients (kappa, chi, Lambda, Gamma)
    static Params from_targets(double kappa_t, double chi_t, Complex Lambda_t,
                               Complex Gamma_t) {
        Params p;
        if (std::abs(chi_t - 2.0 * pi) > 1e-12)
            throw InvalidInput("synthetic system fixes k* = 1, so chi = 2 pi");
        const double Tstar = 2.0 * pi / p.omega0;
        p.gamma_prime = kappa_t / Tstar;
        p.Lambda_hat = Lambda_t / Tstar;
        p.Gamma_hat = Gamma_t / Tstar -
                      p.feedback * p.eta / (p.rho + Complex(0.0, 2.0 * p.omega0));
        return p;
    }

    SyntheticSystem(const Params& p, double eps) : p_(p), eps_(eps) {}

    double eps() const { return eps_; }
    const Params& params() const { return p_; }

    State zero_state() const { return State::Zero(); }
    double norm(const State& s) const { return s.norm(); }
    double inner(const State& a, const State& b) const { return a.dot(b); }

    Complex lambda_plus() const {
        return Complex(p_.gamma_prime * eps_, p_.omega0 + p_.omega1 * eps_);
    }
    double omega() const { return p_.omega0 + p_.omega1 * eps_; }
    double T_star() const { return 2.0 * pi / omega(); }
    int k_star() const { return 1; }
    double kappa_exact(double gamma_prime) const { return gamma_prime * T_star(); }
    double chi_exact() const { return 2.0 * pi; }
    double gamma_prime_exact() const { return p_.gamma_prime; }

    static Complex z1(const State& s) { return {s[0], s[1]}; }
    static Complex z2(const State& s) { return {s[2], s[3]}; }
    static Complex zeta(const State& s) { return {s[4], s[5]}; }
    static State pack(Complex a, Complex b, Complex c) {
        State s;
        s << a.real(), a.imag(), b.real(), b.imag(), c.real(), c.imag();
        return s;
    }

    std::pair<Complex, Complex> coordinates(const State& s) const { return {z1(s), z2(s)}; }
    State eigenstate(Complex a1, Complex a2) const { return pack(a1, a2, 0.0); }
    State complement(const State& s) const { return pack(0.0, 0.0, zeta(s)); }

    // nonlinear parts of the pair equations (what the Duhamel route records)
    std::pair<Complex, Complex> pair_nonlinearity(const State& s) const {
        const Complex a = z1(s), b = z2(s), c = zeta(s);
        const Complex n1 = (p_.Lambda_hat * std::norm(a) + p_.Gamma_hat * std::norm(b)) * a +
                           p_.feedback * c * std::conj(b);
        const Complex n2 = (p_.Gamma_hat * std::norm(a) + p_.Lambda_hat * std::norm(b)) * b +
                           p_.feedback * c * std::conj(a);
        return {n1, n2};
    }

    State rhs(const State& s) const {
        const Complex lam = lambda_plus();
        auto [n1, n2] = pair_nonlinearity(s);
        const Complex d1 = lam * z1(s) + n1;
        const Complex d2 = lam * z2(s) + n2;
        const Complex d3 = -p_.rho * zeta(s) + p_.eta * z1(s) * z2(s);
        return pack(d1, d2, d3);
    }

    State evolve(const State& v0, double T) const {
        std::vector<State> unused;
        return evolve_impl(v0, T, nullptr, unused);
    }

    State evolve_quarters(const State& v0, double T, std::vector<State>& quarters) const {
        quarters.clear();
        return evolve_impl(v0, T, &quarters, quarters);
    }

    State evolve_impl(const State& v0, double T, std::vector<State>* grab,
                      std::vector<State>&) const {
        if (v0.cwiseAbs().maxCoeff() > p_.guard)
            throw InvalidInput("synthetic state exceeds the amplitude guard");
        State s = v0;
        const int n = 4 * std::max(1, int(std::ceil(T / (4.0 * p_.dt) - 1e-12)));
        const double h = T / n;
        for (int i = 0; i < n; ++i) {
            const State k1 = rhs(s);
            const State k2 = rhs(s + 0.5 * h * k1);
            const State k3 = rhs(s + 0.5 * h * k2);
            const State k4 = rhs(s + h * k3);
            s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!s.allFinite()) throw BlowUp("synthetic trajectory lost finiteness");
            if (grab && (i + 1 == n / 4 || i + 1 == n / 2 || i + 1 == 3 * n / 4))
                grab->push_back(s);
        }
        return s;
    }

    struct Recorded {
        State vT;
        std::vector<double> t;
        std::vector<Complex> phi, psi;
    };
    Recorded evolve_recording(const State& v0, double T) const {
        Recorded rec;
        State s = v0;
        const int n = std::max(1, int(std::ceil(T / p_.dt - 1e-12)));
        const double h = T / n;
        auto record = [&](double t, const State& st) {
            auto [f, g] = pair_nonlinearity(st);
            rec.t.push_back(t);
            rec.phi.push_back(f);
            rec.psi.push_back(g);
        };
        record(0.0, s);
        for (int i = 0; i < n; ++i) {
            const State k1 = rhs(s);
            const State k2 = rhs(s + 0.5 * h * k1);
            const State k3 = rhs(s + 0.5 * h * k2);
            const State k4 = rhs(s + h * k3);
            s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            record((i + 1) * h, s);
        }
        rec.vT = s;
        return rec;
    }

    // linearized flow at the origin, available in closed form
    State evolve_linearized(const State& v0, double T) const {
        const Complex g = std::exp(T * lambda_plus());
        return pack(g * z1(v0), g * z2(v0), std::exp(-p_.rho * T) * zeta(v0));
    }
    State linT(const State& s, double T) const {
        return pack(0.0, 0.0, std::exp(-p_.rho * T) * zeta(s));
    }

    std::optional<State> kernel_seed() const { return std::nullopt; }

    double shift_match(const State& v, const State& ref) const {
        const Complex c = z1(v) * std::conj(z1(ref)) + std::conj(z2(v)) * z2(ref);
        return std::arg(c);
    }
    State rotate_state(const State& s, double theta) const {
        const Complex ph = std::exp(Complex(0, theta));
        return pack(ph * z1(s), std::conj(ph) * z2(s), zeta(s));
    }

  private:
    Params p_;
    double eps_;
};

}  // namespace o2hopf::reduction
