#include "tdefumi/model_io.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "tdefumi/errors.hpp"
#include "tdefumi/text.hpp"

namespace tdefumi {
namespace {

constexpr const char* kHeader = "tdefumi-model v1";

std::string join(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += text::fmt(v[i]);
  }
  return s;
}

Eigen::VectorXd parse_vector(const std::string& s, long line) {
  if (s.empty()) return {};
  const auto parts = text::split(s, ',');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = text::to_double(parts[i], "value", line);
  return v;
}

}  // namespace

void write_train_config(std::ostream& os, const TrainConfig& c, const std::string& prefix) {
  os << prefix << "u = " << text::fmt(c.u) << "\n"
     << prefix << "v = " << text::fmt(c.v) << "\n"
     << prefix << "s = " << text::fmt(c.s) << "\n"
     << prefix << "lambda = " << text::fmt(c.lambda) << "\n"
     << prefix << "beta = " << text::fmt(c.beta) << "\n"
     << prefix << "epsilon = " << text::fmt(c.epsilon) << "\n"
     << prefix << "target_atoms = " << c.target_atoms << "\n"
     << prefix << "nontarget_atoms = " << c.nontarget_atoms << "\n"
     << prefix << "batch_size = " << c.batch_size << "\n"
     << prefix << "epochs = " << c.epochs << "\n"
     << prefix << "rho0 = " << text::fmt(c.rho0) << "\n"
     << prefix << "t0 = " << text::fmt(c.t0) << "\n"
     << prefix << "seed = " << c.seed << "\n"
     << prefix << "tolerance = " << text::fmt(c.tolerance) << "\n"
     << prefix << "lambda2_stab = " << text::fmt(c.lambda2_stab) << "\n"
     << prefix << "code_ridge = " << text::fmt(c.code_ridge) << "\n"
     << prefix << "solver_max_iters = " << c.solver_max_iters << "\n"
     << prefix << "solver_tolerance = " << text::fmt(c.solver_tolerance) << "\n";
}

bool apply_train_config_key(TrainConfig& c, const std::string& key, const std::string& value) {
  const std::map<std::string, double*> reals = {
      {"u", &c.u},           {"v", &c.v},
      {"s", &c.s},           {"lambda", &c.lambda},
      {"beta", &c.beta},     {"epsilon", &c.epsilon},
      {"rho0", &c.rho0},     {"t0", &c.t0},
      {"tolerance", &c.tolerance}, {"lambda2_stab", &c.lambda2_stab},
      {"code_ridge", &c.code_ridge}, {"solver_tolerance", &c.solver_tolerance}};
  const std::map<std::string, int*> ints = {{"target_atoms", &c.target_atoms},
                                            {"nontarget_atoms", &c.nontarget_atoms},
                                            {"batch_size", &c.batch_size},
                                            {"epochs", &c.epochs},
                                            {"solver_max_iters", &c.solver_max_iters}};
  if (auto it = reals.find(key); it != reals.end()) {
    *it->second = text::to_double(value, key);
    return true;
  }
  if (auto it = ints.find(key); it != ints.end()) {
    *it->second = static_cast<int>(text::to_int(value, key));
    return true;
  }
  if (key == "seed") {
    c.seed = text::to_uint64(value, key);
    return true;
  }
  return false;
}

void save_model(std::ostream& os, const Model& m) {
  const Eigen::MatrixXd& D = m.dictionary.atoms();
  os << kHeader << "\n";
  os << "freqs_rad_s = ";
  for (std::size_t i = 0; i < m.grid.size(); ++i) os << (i ? "," : "") << text::fmt(m.grid.omegas()[i]);
  os << "\n";
  os << "L = " << D.rows() << "\n";
  os << "T = " << m.dictionary.target_count() << "\n";
  os << "M = " << m.dictionary.nontarget_count() << "\n";
  os << "dictionary\n";
  for (Eigen::Index r = 0; r < D.rows(); ++r) os << join(D.row(r).transpose()) << "\n";
  os << "w = " << join(m.classifier.w) << "\n";
  os << "psi = " << text::fmt(m.classifier.psi) << "\n";
  os << "mu0 = " << join(m.stats.mu0) << "\n";
  os << "n_target = " << m.stats.n_target << "\n";
  os << "n_background = " << m.stats.n_background << "\n";
  write_train_config(os, m.config, "config.");
  os << "objective_log = "
     << join(Eigen::Map<const Eigen::VectorXd>(m.objective_log.data(), static_cast<Eigen::Index>(m.objective_log.size())))
     << "\n";
  os << "end\n";
}

Model load_model(std::istream& is) {
  std::string raw;
  long line = 0;
  if (!std::getline(is, raw) || text::trim(raw) != kHeader) throw FormatError("missing 'tdefumi-model v1' header", 1);
  ++line;

  Model m;
  long L = -1, T = -1, M = -1;
  Eigen::MatrixXd D;
  bool ended = false, have_dict = false, have_w = false;
  while (std::getline(is, raw)) {
    ++line;
    const std::string body(text::trim(raw));
    if (body.empty()) continue;
    if (body == "end") {
      ended = true;
      break;
    }
    if (body == "dictionary") {
      if (L <= 0 || T < 0 || M < 1) throw FormatError("dictionary block before L, T, M", line);
      D.resize(L, T + M);
      for (long r = 0; r < L; ++r) {
        if (!std::getline(is, raw)) throw FormatError("truncated dictionary", line);
        ++line;
        const Eigen::VectorXd row = parse_vector(std::string(text::trim(raw)), line);
        if (row.size() != T + M) throw FormatError("dictionary row has wrong length", line);
        D.row(r) = row.transpose();
      }
      have_dict = true;
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw FormatError("expected key = value", line);
    const std::string key(text::trim(std::string_view(body).substr(0, eq)));
    const std::string value(text::trim(std::string_view(body).substr(eq + 1)));
    if (key == "freqs_rad_s") {
      const Eigen::VectorXd w = parse_vector(value, line);
      m.grid = FrequencyGrid(std::vector<double>(w.data(), w.data() + w.size()));
    } else if (key == "L") {
      L = static_cast<long>(text::to_int(value, key, line));
    } else if (key == "T") {
      T = static_cast<long>(text::to_int(value, key, line));
    } else if (key == "M") {
      M = static_cast<long>(text::to_int(value, key, line));
    } else if (key == "w") {
      m.classifier.w = parse_vector(value, line);
      have_w = true;
    } else if (key == "psi") {
      m.classifier.psi = text::to_double(value, key, line);
    } else if (key == "mu0") {
      m.stats.mu0 = parse_vector(value, line);
    } else if (key == "n_target") {
      m.stats.n_target = static_cast<std::size_t>(text::to_int(value, key, line));
    } else if (key == "n_background") {
      m.stats.n_background = static_cast<std::size_t>(text::to_int(value, key, line));
    } else if (key.rfind("config.", 0) == 0) {
      if (!apply_train_config_key(m.config, key.substr(7), value))
        throw FormatError("unknown config key '" + key + "'", line);
    } else if (key == "objective_log") {
      const Eigen::VectorXd v = parse_vector(value, line);
      m.objective_log.assign(v.data(), v.data() + v.size());
    } else {
      throw FormatError("unknown key '" + key + "'", line);
    }
  }
  if (!ended) throw FormatError("model file is missing its 'end' line", line);
  if (!have_dict || !have_w) throw FormatError("model file lacks a dictionary or classifier");
  if (m.classifier.w.size() != T + M) throw FormatError("classifier length does not match T + M");
  if (static_cast<long>(2 * m.grid.size()) != L) throw FormatError("L does not match the frequency grid");
  if (m.stats.mu0.size() != L) throw FormatError("mu0 length does not match L");
  try {
    m.dictionary = Dictionary(std::move(D), T);
  } catch (const InvalidParameter& e) {
    throw FormatError(e.what());
  }
  return m;
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  save_model(os, model);
  if (!os) throw std::runtime_error("failed writing " + path);
}

Model load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load_model(is);
}

}  // namespace tdefumi
