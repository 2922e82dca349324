// Parameter exploration for the designed bifurcation testbed: prints the
// rightmost eigenvalue of L_k(eps) per transverse mode so the crossing can
// be placed at |k| = 1 with every other mode damped.
#include <cstdio>
#include <string>
#include <cstdlib>

#include "o2hopf/spectral/eigen.hpp"

using namespace o2hopf;

int main(int argc, char** argv) {
    pde::ModelM0::Params P;
    int N1 = 129;
    double L = 10.0;
    const bool calibrate = argc > 1 && std::string(argv[1]) == std::string("calibrate");
    for (int i = calibrate ? 2 : 1; i + 1 < argc; i += 2) {
        const std::string key = argv[i];
        const double val = std::atof(argv[i + 1]);
        if (key == "d1") P.d1 = val;
        else if (key == "d3") P.d3 = val;
        else if (key == "c1inf") P.c1inf = val;
        else if (key == "c3inf") P.c3inf = val;
        else if (key == "kappa0") P.kappa0 = val;
        else if (key == "w0") P.w0 = val;
        else if (key == "alpha") P.alpha = val;
        else if (key == "beta") P.beta = val;
        else if (key == "sigw") P.sigma_w = val;
        else if (key == "kappa3") P.kappa3 = val;
        else if (key == "t1") P.t1 = val;
        else if (key == "b1") P.b1 = val;
        else if (key == "b3") P.b3 = val;
        else if (key == "N1") N1 = int(val);
        else if (key == "L") L = val;
        else { std::fprintf(stderr, "unknown key %s\n", key.c_str()); return 1; }
    }
    pde::ModelM0 model(P);
    pde::DiscretizationGrid g;
    g.L = L;
    g.N1 = N1;
    g.K = 4;
    g.dt = 0.01;

    auto gamma_k1 = [&](double kappa0) {
        pde::ModelM0::Params Q = P;
        Q.kappa0 = kappa0;
        pde::ModelM0 mq(Q);
        auto prof = pde::solve_profile(mq, 0.0, g);
        pde::RhsContext ctx(mq, 0.0, prof, g);
        auto top = spectral::rightmost_eigenvalue(spectral::assemble_Lk(ctx, 1));
        return top.lambda;
    };

    if (calibrate) {
        // secant on kappa0 so that gamma(eps = 0) = 0 on this exact grid
        double k0 = P.kappa0, k1 = P.kappa0 + 0.02;
        double g0 = gamma_k1(k0).real(), g1 = gamma_k1(k1).real();
        for (int it = 0; it < 40 && std::abs(g1) > 1e-11; ++it) {
            const double k2 = k1 - g1 * (k1 - k0) / (g1 - g0);
            k0 = k1;
            g0 = g1;
            k1 = k2;
            g1 = gamma_k1(k1).real();
            std::printf("it %2d  kappa0 = %.17g  gamma = %+.3e\n", it, k1, g1);
        }
        const Complex lam = gamma_k1(k1);
        std::printf("kappa0 = %.17g\nomega0 = %.17g\n", k1, lam.imag());
        return 0;
    }

    for (double eps : {-0.1, 0.0, 0.1}) {
        auto prof = pde::solve_profile(model, eps, g);
        pde::RhsContext ctx(model, eps, prof, g);
        std::printf("eps = %+5.2f :", eps);
        for (int k = 0; k <= g.K; ++k) {
            auto op = spectral::assemble_Lk(ctx, k);
            auto top = spectral::rightmost_eigenvalue(op);
            std::printf("  k=%d (%+8.5f, %+8.5f)", k, top.lambda.real(),
                        std::abs(top.lambda.imag()));
        }
        std::printf("\n");
    }
    return 0;
}
