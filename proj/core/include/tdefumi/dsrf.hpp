#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace tdefumi {

using ComplexSpectrum = Eigen::VectorXcd;
// Real embedding of a spectrum: all N real parts followed by all N imaginary parts.
using FeatureVector = Eigen::VectorXd;

// Transmit angular frequencies in rad/s, strictly increasing.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::vector<double> omegas);

  // n frequencies log-spaced between lo and hi (inclusive).
  static FrequencyGrid log_spaced(double lo, double hi, std::size_t n);
  // 21 frequencies from 2*pi*300 Hz to 2*pi*90 kHz.
  static FrequencyGrid default_grid();

  const std::vector<double>& omegas() const { return omegas_; }
  std::size_t size() const { return omegas_.size(); }
  double front() const { return omegas_.front(); }
  double back() const { return omegas_.back(); }
  bool operator==(const FrequencyGrid&) const = default;

 private:
  std::vector<double> omegas_;
};

struct DsrfParams {
  double c0 = 0.0;
  std::vector<double> cks;
  std::vector<double> zetas;

  void validate() const;
};

// H(w) = c0 + sum_k c_k / (1 + j w / zeta_k)
ComplexSpectrum dsrf_response(const FrequencyGrid& grid, const DsrfParams& params);

// Single-relaxation atom 1 / (1 + j w / zeta), unnormalized.
ComplexSpectrum dsrf_atom(const FrequencyGrid& grid, double zeta);

FeatureVector stack_complex(const ComplexSpectrum& s);
ComplexSpectrum unstack(const FeatureVector& v);

// n relaxation frequencies log-spaced across the grid's band.
std::vector<double> log_spaced_zetas(const FrequencyGrid& grid, std::size_t n);

}  // namespace tdefumi

#include "tdefumi/dictionary.hpp"

namespace tdefumi {

// One stacked atom per zeta, in the order given (callers pass zetas ascending).
// With normalize set, every atom is scaled to unit l2 norm. All atoms are
// non-target atoms (target_count 0).
Dictionary build_dsrf_dictionary(const FrequencyGrid& grid, const std::vector<double>& zetas,
                                 bool normalize = true);

}  // namespace tdefumi
