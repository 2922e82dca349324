#pragma once

#include <json.hpp>

#include <fstream>

#include "o2hopf/pde/model.hpp"
#include "o2hopf/reduction/ops.hpp"
#include "o2hopf/spectral/crossing.hpp"
#include "o2hopf/spectral/evans.hpp"

namespace o2hopf::io {

using json = nlohmann::ordered_json;

// Every numerical tolerance used by the modules, with its default.
struct Tolerances {
    double genericity = 1e-10;
    double newton = 1e-7;
    double newton_trust_radius = 100.0;
    double profile = 1e-12;
    double eigen_residual = 1e-8;
    double crossing_gamma = 1e-10;
    double crossing_dgamma_eps = 1e-4;
    double evans_rtol = 1e-10;
    double evans_split = 1e-8;
    double complement = 1e-8;
    double right_inverse = 1e-8;
    int gmres_max = 150;
    double picard = 1e-10;
    int picard_max = 40;
    double contraction_limit = 0.9;
    double fit_radius = 0.04;
    double fit_residual_limit = 0.1;
    double spurious_threshold = 1e-3;
    double hyp_dissipation = 0.5;
    double amplitude_guard = 100.0;
    double blowup_norm = 1e6;

    json to_json() const {
        return json{{"genericity", genericity},
                    {"newton", newton},
                    {"newton_trust_radius", newton_trust_radius},
                    {"profile", profile},
                    {"eigen_residual", eigen_residual},
                    {"crossing_gamma", crossing_gamma},
                    {"crossing_dgamma_eps", crossing_dgamma_eps},
                    {"evans_rtol", evans_rtol},
                    {"evans_split", evans_split},
                    {"complement", complement},
                    {"right_inverse", right_inverse},
                    {"gmres_max", gmres_max},
                    {"picard", picard},
                    {"picard_max", picard_max},
                    {"contraction_limit", contraction_limit},
                    {"fit_radius", fit_radius},
                    {"fit_residual_limit", fit_residual_limit},
                    {"spurious_threshold", spurious_threshold},
                    {"hyp_dissipation", hyp_dissipation},
                    {"amplitude_guard", amplitude_guard},
                    {"blowup_norm", blowup_norm}};
    }

    reduction::ReductionConfig reduction() const {
        reduction::ReductionConfig c;
        c.complement_tol = complement;
        c.right_inverse_tol = right_inverse;
        c.gmres_max = gmres_max;
        c.picard_tol = picard;
        c.picard_max = picard_max;
        c.contraction_limit = contraction_limit;
        c.spurious_threshold = spurious_threshold;
        c.fit_residual_limit = fit_residual_limit;
        return c;
    }
    spectral::EvansOptions evans() const {
        spectral::EvansOptions o;
        o.rtol = evans_rtol;
        o.split_tol = evans_split;
        return o;
    }
    spectral::CrossingOptions crossing() const {
        spectral::CrossingOptions o;
        o.gamma_tol = crossing_gamma;
        o.dgamma_eps = crossing_dgamma_eps;
        return o;
    }
};

struct RunConfig {
    std::string model_id = "M0";
    pde::DiscretizationGrid grid = pde::m0_calibration_grid();
    double pipeline_dt = 0.02;
    double eps = 0.0;                     // single-eps commands
    std::vector<double> eps_sweep{0.004, 0.0071, 0.0127, 0.0225, 0.04};
    double crossing_lo = -0.05, crossing_hi = 0.05;
    int k_mode = 0;                        // spectrum / evans mode
    double region[4] = {-0.5, 1.0, -2.0, 2.0};  // re_min re_max im_min im_max
    std::vector<Complex> contour{{0.2, 0.0}, {0.0, 0.2}, {-0.2, 0.0}, {0.0, -0.2}};
    double evans_L = 10.0;
    Tolerances tol;
    std::string outdir = "out";
    std::uint64_t seed = 20240817;

    json to_json() const {
        json contour_j = json::array();
        for (const Complex& z : contour) contour_j.push_back({z.real(), z.imag()});
        return json{{"model", model_id},
                    {"grid", {{"L", grid.L}, {"N1", grid.N1}, {"K", grid.K}, {"dt", grid.dt}}},
                    {"pipeline_dt", pipeline_dt},
                    {"eps", eps},
                    {"eps_sweep", eps_sweep},
                    {"crossing_interval", {crossing_lo, crossing_hi}},
                    {"k_mode", k_mode},
                    {"region", {region[0], region[1], region[2], region[3]}},
                    {"contour", contour_j},
                    {"evans_L", evans_L},
                    {"tolerances", tol.to_json()},
                    {"outdir", outdir},
                    {"seed", seed}};
    }
};

namespace detail {

// rejects keys that the reference object does not carry
inline void check_keys(const json& user, const json& reference, const std::string& path) {
    if (!user.is_object()) return;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string where = path.empty() ? it.key() : path + "." + it.key();
        if (!reference.contains(it.key())) throw ParseError("unknown config key '" + where + "'");
        if (it.value().is_object()) check_keys(it.value(), reference.at(it.key()), where);
    }
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    detail::check_keys(j, c.to_json(), "");
    if (j.contains("model")) c.model_id = j.at("model").get<std::string>();
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("L")) c.grid.L = g.at("L").get<double>();
        if (g.contains("N1")) c.grid.N1 = g.at("N1").get<int>();
        if (g.contains("K")) c.grid.K = g.at("K").get<int>();
        if (g.contains("dt")) c.grid.dt = g.at("dt").get<double>();
    }
    if (j.contains("pipeline_dt")) c.pipeline_dt = j.at("pipeline_dt").get<double>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("eps_sweep")) c.eps_sweep = j.at("eps_sweep").get<std::vector<double>>();
    if (j.contains("crossing_interval")) {
        c.crossing_lo = j.at("crossing_interval").at(0).get<double>();
        c.crossing_hi = j.at("crossing_interval").at(1).get<double>();
    }
    if (j.contains("k_mode")) c.k_mode = j.at("k_mode").get<int>();
    if (j.contains("region"))
        for (int i = 0; i < 4; ++i) c.region[i] = j.at("region").at(i).get<double>();
    if (j.contains("contour")) {
        c.contour.clear();
        for (const auto& v : j.at("contour"))
            c.contour.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
    if (j.contains("evans_L")) c.evans_L = j.at("evans_L").get<double>();
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        auto get = [&](const char* k, auto& slot) {
            if (t.contains(k)) slot = t.at(k).get<std::decay_t<decltype(slot)>>();
        };
        get("genericity", c.tol.genericity);
        get("newton", c.tol.newton);
        get("newton_trust_radius", c.tol.newton_trust_radius);
        get("profile", c.tol.profile);
        get("eigen_residual", c.tol.eigen_residual);
        get("crossing_gamma", c.tol.crossing_gamma);
        get("crossing_dgamma_eps", c.tol.crossing_dgamma_eps);
        get("evans_rtol", c.tol.evans_rtol);
        get("evans_split", c.tol.evans_split);
        get("complement", c.tol.complement);
        get("right_inverse", c.tol.right_inverse);
        get("gmres_max", c.tol.gmres_max);
        get("picard", c.tol.picard);
        get("picard_max", c.tol.picard_max);
        get("contraction_limit", c.tol.contraction_limit);
        get("fit_radius", c.tol.fit_radius);
        get("fit_residual_limit", c.tol.fit_residual_limit);
        get("spurious_threshold", c.tol.spurious_threshold);
        get("hyp_dissipation", c.tol.hyp_dissipation);
        get("amplitude_guard", c.tol.amplitude_guard);
        get("blowup_norm", c.tol.blowup_norm);
    }
    if (j.contains("outdir")) c.outdir = j.at("outdir").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline std::string dump_config(const RunConfig& c) { return c.to_json().dump(2) + "\n"; }

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config parse: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace o2hopf::io
