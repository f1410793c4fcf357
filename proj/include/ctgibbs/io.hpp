#ifndef CTGIBBS_IO_HPP
#define CTGIBBS_IO_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctgibbs/grid.hpp"
#include "ctgibbs/kernel.hpp"
#include "ctgibbs/paths.hpp"

namespace ctgibbs {

using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void save_matrix_csv(const std::filesystem::path& file, const Eigen::MatrixXd& M,
                            bool with_header = true) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out << std::setprecision(17);
  if (with_header) out << "n=" << M.rows() << "\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      out << M(i, j) << (j + 1 < M.cols() ? "," : "");
    }
    out << "\n";
  }
}

inline Eigen::MatrixXd load_square_matrix_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open: " + file.string());
  std::string header;
  if (!std::getline(in, header) || header.rfind("n=", 0) != 0) {
    throw IoError("expected 'n=<N>' header in " + file.string());
  }
  int n = std::stoi(header.substr(2));
  if (n < 2) throw IoError("bad matrix size in " + file.string());
  Eigen::MatrixXd M(n, n);
  std::string line;
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw IoError("truncated matrix in " + file.string());
    std::stringstream ss(line);
    std::string cell;
    for (int j = 0; j < n; ++j) {
      if (!std::getline(ss, cell, ',')) throw IoError("short row in " + file.string());
      M(i, j) = std::stod(cell);
    }
  }
  return M;
}

inline void save_vector_csv(const std::filesystem::path& file, const Eigen::VectorXd& v) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << "\n";
}

inline Eigen::VectorXd load_vector_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open: " + file.string());
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) vals.push_back(std::stod(line));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), Eigen::Index(vals.size()));
}

inline void save_path_csv(const std::filesystem::path& file, const CadlagPath& p) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out << std::setprecision(17) << "t,state\n" << 0.0 << "," << p.x0 << "\n";
  for (std::size_t k = 0; k < p.jump_times.size(); ++k) {
    out << p.jump_times[k] << "," << p.states[k] << "\n";
  }
}

inline void write_json_file(const std::filesystem::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out << j.dump(2) << "\n";
}

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/*
 * Experiment configuration: a single JSON file fixing the kernel, the
 * potential, the grid, time points and Monte Carlo settings. Outputs land
 * in a run directory named by the hash of the canonical config dump.
 */
struct ExperimentConfig {
  json raw;
  std::filesystem::path base_dir;  // directory of the config file

  int grid_n = 64;
  std::vector<double> times;
  double mc_T = 50.0;
  long mc_paths = 10000;
  std::uint64_t seed = 1;
  double tol_validate = 1e-10;
  double tol_series = 1e-12;
  std::string out_dir = "runs";

  static ExperimentConfig load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config: " + file.string());
    ExperimentConfig cfg;
    try {
      in >> cfg.raw;
    } catch (const json::exception& e) {
      throw IoError(std::string("config parse error: ") + e.what());
    }
    cfg.base_dir = file.has_parent_path() ? file.parent_path() : ".";
    cfg.grid_n = cfg.raw.value("grid_n", 64);
    if (cfg.raw.contains("times")) {
      cfg.times = cfg.raw["times"].get<std::vector<double>>();
    } else {
      cfg.times = {0.1, 1.0, 5.0};
    }
    if (cfg.raw.contains("mc")) {
      const json& mc = cfg.raw["mc"];
      cfg.mc_T = mc.value("T", 50.0);
      cfg.mc_paths = mc.value("n_paths", 10000L);
      cfg.seed = mc.value("seed", std::uint64_t(1));
    }
    if (cfg.raw.contains("tol")) {
      cfg.tol_validate = cfg.raw["tol"].value("validate", 1e-10);
      cfg.tol_series = cfg.raw["tol"].value("series", 1e-12);
    }
    cfg.out_dir = cfg.raw.value("out", std::string("runs"));
    return cfg;
  }

  std::string hash() const { return fnv1a_hex(raw.dump()); }

  KernelModel make_kernel() const {
    if (!raw.contains("kernel")) throw IoError("config: missing 'kernel'");
    const json& k = raw["kernel"];
    std::string kind = k.value("kind", "");
    if (kind == "cosine") return KernelModel::cosine();
    if (kind == "polynomial_g") return KernelModel::polynomial_g(k.at("a0").get<double>());
    if (kind == "sine_asym") return KernelModel::sine_asym(k.at("a").get<double>());
    if (kind == "tabulated") {
      std::filesystem::path f = base_dir / k.at("file").get<std::string>();
      return KernelModel::tabulated(load_square_matrix_csv(f));
    }
    throw IoError("config: unknown kernel kind '" + kind + "'");
  }

  GridFunction make_potential(const KernelModel& kernel, const Grid& g) const {
    if (!raw.contains("potential")) return GridFunction::Zero(g.n);
    const json& p = raw["potential"];
    std::string kind = p.value("kind", "constant");
    if (kind == "constant") {
      return GridFunction::Constant(g.n, p.value("b", 0.0));
    }
    if (kind == "matched_quadratic") {
      if (kernel.kind != KernelKind::polynomial_g) {
        throw IoError("config: matched_quadratic potential requires a polynomial_g kernel");
      }
      double b = p.value("b", 0.0);
      return (b + (1.0 - kernel.a0) * (g.nodes.array() * (1.0 - g.nodes.array()))).matrix();
    }
    if (kind == "trig") {
      GridFunction v = GridFunction::Constant(g.n, p.value("c0", 0.0));
      constexpr double two_pi = 2.0 * std::numbers::pi;
      if (p.contains("cos")) {
        auto c = p["cos"].get<std::vector<double>>();
        for (std::size_t m = 0; m < c.size(); ++m) {
          v.array() += c[m] * (two_pi * double(m + 1) * g.nodes.array()).cos();
        }
      }
      if (p.contains("sin")) {
        auto s = p["sin"].get<std::vector<double>>();
        for (std::size_t m = 0; m < s.size(); ++m) {
          v.array() += s[m] * (two_pi * double(m + 1) * g.nodes.array()).sin();
        }
      }
      return v;
    }
    if (kind == "tabulated") {
      std::filesystem::path f = base_dir / p.at("file").get<std::string>();
      GridFunction v = load_vector_csv(f);
      if (v.size() != g.n) throw IoError("config: tabulated potential size != grid_n");
      return v;
    }
    throw IoError("config: unknown potential kind '" + kind + "'");
  }
};

}  // namespace ctgibbs

#endif  // CTGIBBS_IO_HPP
