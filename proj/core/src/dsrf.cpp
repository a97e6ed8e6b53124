#include "tdefumi/dsrf.hpp"

#include <cmath>
#include <numbers>

#include "tdefumi/errors.hpp"

namespace tdefumi {

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.size() < 2) throw InvalidParameter("frequency grid needs at least two frequencies");
  for (std::size_t i = 0; i < omegas_.size(); ++i) {
    if (!(omegas_[i] > 0.0) || !std::isfinite(omegas_[i]))
      throw InvalidParameter("frequencies must be positive and finite");
    if (i > 0 && !(omegas_[i] > omegas_[i - 1]))
      throw InvalidParameter("frequencies must be strictly increasing");
  }
}

FrequencyGrid FrequencyGrid::log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw InvalidParameter("log_spaced requires 0 < lo < hi and n >= 2");
  std::vector<double> w(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  w.front() = lo;
  w.back() = hi;
  return FrequencyGrid(std::move(w));
}

FrequencyGrid FrequencyGrid::default_grid() {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return log_spaced(two_pi * 300.0, two_pi * 90000.0, 21);
}

void DsrfParams::validate() const {
  if (cks.size() != zetas.size())
    throw InvalidParameter("DSRF parameters need one amplitude per relaxation frequency");
  for (double z : zetas)
    if (!(z > 0.0) || !std::isfinite(z)) throw InvalidParameter("relaxation frequencies must be > 0");
}

ComplexSpectrum dsrf_response(const FrequencyGrid& grid, const DsrfParams& params) {
  params.validate();
  ComplexSpectrum h(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::complex<double> acc(params.c0, 0.0);
    for (std::size_t k = 0; k < params.zetas.size(); ++k)
      acc += params.cks[k] / std::complex<double>(1.0, grid.omegas()[i] / params.zetas[k]);
    h[static_cast<Eigen::Index>(i)] = acc;
  }
  return h;
}

ComplexSpectrum dsrf_atom(const FrequencyGrid& grid, double zeta) {
  if (!(zeta > 0.0) || !std::isfinite(zeta))
    throw InvalidParameter("relaxation frequency must be > 0");
  ComplexSpectrum h(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    h[static_cast<Eigen::Index>(i)] = 1.0 / std::complex<double>(1.0, grid.omegas()[i] / zeta);
  return h;
}

FeatureVector stack_complex(const ComplexSpectrum& s) {
  const Eigen::Index n = s.size();
  FeatureVector v(2 * n);
  v.head(n) = s.real();
  v.tail(n) = s.imag();
  return v;
}

ComplexSpectrum unstack(const FeatureVector& v) {
  if (v.size() % 2 != 0) throw FormatError("stacked feature vector has odd length");
  const Eigen::Index n = v.size() / 2;
  ComplexSpectrum s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = {v[i], v[n + i]};
  return s;
}

std::vector<double> log_spaced_zetas(const FrequencyGrid& grid, std::size_t n) {
  if (n == 0) throw InvalidParameter("need at least one relaxation frequency");
  if (n == 1) return {std::sqrt(grid.front() * grid.back())};
  return FrequencyGrid::log_spaced(grid.front(), grid.back(), n).omegas();
}

Dictionary::Dictionary(Eigen::MatrixXd atoms, Eigen::Index target_count)
    : atoms_(std::move(atoms)), target_count_(target_count) {
  if (target_count_ < 0 || target_count_ >= atoms_.cols())
    throw InvalidParameter("dictionary needs 0 <= target_count < atom count");
  if (!atoms_.allFinite()) throw InvalidParameter("dictionary atoms must be finite");
  for (Eigen::Index k = 0; k < atoms_.cols(); ++k)
    if (atoms_.col(k).norm() > 1.0 + kNormSlack)
      throw InvalidParameter("dictionary atom " + std::to_string(k) + " lies outside the unit ball");
}

Dictionary Dictionary::nontarget_subdictionary() const {
  return Dictionary(Eigen::MatrixXd(nontarget_atoms()), 0);
}

Dictionary build_dsrf_dictionary(const FrequencyGrid& grid, const std::vector<double>& zetas,
                                 bool normalize) {
  if (zetas.empty()) throw InvalidParameter("DSRF dictionary needs at least one zeta");
  Eigen::MatrixXd atoms(2 * static_cast<Eigen::Index>(grid.size()),
                        static_cast<Eigen::Index>(zetas.size()));
  for (std::size_t k = 0; k < zetas.size(); ++k) {
    FeatureVector a = stack_complex(dsrf_atom(grid, zetas[k]));
    if (normalize) {
      a /= a.norm();
    } else if (a.norm() > 1.0) {
      // Raw DSRF atoms can exceed the unit ball; keep the dictionary constraint.
      a /= a.norm();
    }
    atoms.col(static_cast<Eigen::Index>(k)) = a;
  }
  return Dictionary(std::move(atoms), 0);
}

}  // namespace tdefumi
