#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>

#include "o2hopf/io/config.hpp"
#include "o2hopf/pde/checkpoint.hpp"

namespace o2hopf::io {

// CSV with a header row; a gnuplot-friendly .dat twin carries the same
// columns with a '#' header
class TableWriter {
  public:
    TableWriter(std::vector<std::string> columns) : cols_(std::move(columns)) {}

    void row(const std::vector<double>& values) {
        if (values.size() != cols_.size()) throw InvalidInput("table row arity mismatch");
        rows_.push_back(values);
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write '" + path + "'");
        out << std::setprecision(17);
        for (std::size_t i = 0; i < cols_.size(); ++i)
            out << cols_[i] << (i + 1 < cols_.size() ? "," : "\n");
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i)
                out << r[i] << (i + 1 < r.size() ? "," : "\n");
        }
        if (!out) throw IoError("short write '" + path + "'");
    }

    void write_dat(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write '" + path + "'");
        out << std::setprecision(17) << "#";
        for (const auto& c : cols_) out << " " << c;
        out << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out << r[i] << (i + 1 < r.size() ? " " : "\n");
        }
    }

    std::size_t size() const { return rows_.size(); }

  private:
    std::vector<std::string> cols_;
    std::vector<std::vector<double>> rows_;
};

// every command writes one manifest listing inputs, tolerances and products
class Manifest {
  public:
    Manifest(const std::string& command, const RunConfig& cfg) {
        j_["command"] = command;
        j_["config"] = cfg.to_json();
        j_["files"] = json::array();
    }

    void add_file(const std::string& path) { j_["files"].push_back(path); }
    json& summary() { return j_["summary"]; }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write manifest '" + path + "'");
        out << j_.dump(2) << "\n";
    }

  private:
    json j_;
};

inline std::string ensure_outdir(const RunConfig& cfg) {
    std::filesystem::path p = cfg.outdir;
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.outdir + "'");
    return p.string();
}

inline json complex_json(Complex z) { return json{z.real(), z.imag()}; }

inline json orbit_json(const reduction::OrbitRecord& r) {
    json j;
    j["eps"] = r.eps;
    j["kind"] = reduced::to_string(r.kind);
    j["amplitude"] = r.amplitude;
    j["amplitude_rescaled"] = r.amplitude_rescaled;
    j["mu"] = r.mu;
    j["T"] = r.T;
    j["a1"] = complex_json(r.a1);
    j["a2"] = complex_json(r.a2);
    j["return_residual"] = r.return_residual;
    j["shift_residual"] = r.shift_residual;
    j["traveling_speed"] = r.speed;
    j["omega"] = r.omega;
    j["converged"] = r.converged;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline json fit_json(const reduction::CoefficientFit& f) {
    json j;
    j["kappa"] = f.kappa;
    j["chi"] = f.chi;
    j["Lambda"] = complex_json(f.Lambda);
    j["Gamma"] = complex_json(f.Gamma);
    j["Upsilon1"] = complex_json(f.Upsilon1);
    j["Lambda2"] = complex_json(f.Lambda2);
    j["Upsilon2"] = complex_json(f.Upsilon2);
    j["Gamma2"] = complex_json(f.Gamma2);
    j["residual"] = f.residual;
    j["sample_radius"] = f.sample_radius;
    j["spurious_max"] = f.spurious_max;
    return j;
}

}  // namespace o2hopf::io
