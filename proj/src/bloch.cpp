#include "qbeats/bloch.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "qbeats/errors.hpp"

namespace qbeats {

SystemParams SystemParams::make(double rabi, double laser_detuning,
                                double zeeman_diff, double gamma) {
  SystemParams p;
  p.rabi = rabi;
  p.laser_detuning = laser_detuning;
  p.zeeman_diff = zeeman_diff;
  p.gamma = gamma;
  p.gamma_pi = gamma / 3.0;
  p.gamma_sigma = 2.0 * gamma / 3.0;
  p.validate();
  return p;
}

void SystemParams::validate() const {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("SystemParams: gamma must be > 0");
  }
  if (rabi < 0.0) {
    throw std::invalid_argument("SystemParams: rabi must be >= 0");
  }
  if (std::abs(gamma_pi + gamma_sigma - gamma) > 1e-12 * gamma) {
    throw std::invalid_argument(
        "SystemParams: gamma_pi + gamma_sigma must equal gamma");
  }
}

BlochVector excited_superposition() {
  BlochVector q;
  q.q[kA11] = 0.5;
  q.q[kA22] = 0.5;
  return q;
}

BlochVector ground_superposition() {
  BlochVector q;
  q.q[kA33] = 0.5;
  q.q[kA44] = 0.5;
  return q;
}

GeneratorMatrix build_generator(const SystemParams& params) {
  params.validate();
  const double g = params.gamma;
  const double gp = params.gamma_pi;
  const double gs = params.gamma_sigma;
  const double dl = params.laser_detuning;
  const double dz = params.zeeman_diff;
  const Complex iOm(0.0, params.rabi);
  const Complex i(0.0, 1.0);

  // gamma_1 = gamma_2 = gamma_pi: the pi channel feeds the same-m ground
  // state, the sigma channel the opposite one; probability conservation
  // then makes the four population rows sum to zero.
  GeneratorMatrix gen;
  gen.params = params;
  Mat8& m = gen.m;

  m(kA11, kA11) = -g;
  m(kA11, kA31) = iOm;
  m(kA11, kA13) = -iOm;

  m(kA13, kA13) = -(g / 2.0 + i * dl);
  m(kA13, kA11) = -iOm;
  m(kA13, kA33) = iOm;

  m(kA22, kA22) = -g;
  m(kA22, kA42) = -iOm;
  m(kA22, kA24) = iOm;

  m(kA24, kA24) = -(g / 2.0 + i * (dl - dz));
  m(kA24, kA22) = iOm;
  m(kA24, kA44) = -iOm;

  m(kA31, kA31) = -(g / 2.0 - i * dl);
  m(kA31, kA11) = iOm;
  m(kA31, kA33) = -iOm;

  m(kA33, kA11) = gp;
  m(kA33, kA22) = gs;
  m(kA33, kA31) = -iOm;
  m(kA33, kA13) = iOm;

  m(kA42, kA42) = -(g / 2.0 - i * (dl - dz));
  m(kA42, kA22) = -iOm;
  m(kA42, kA44) = iOm;

  m(kA44, kA11) = gs;
  m(kA44, kA22) = gp;
  m(kA44, kA42) = iOm;
  m(kA44, kA24) = -iOm;

  return gen;
}

namespace detail {

// Pade order 13 with scaling and squaring; accurate to machine precision
// for the moderate norms that occur here.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  static const double b[14] = {64764752532480000.0,
                               32382376266240000.0,
                               7771770303897600.0,
                               1187353796428800.0,
                               129060195264000.0,
                               10559470521600.0,
                               670442572800.0,
                               33522128640.0,
                               1323241920.0,
                               40840800.0,
                               960960.0,
                               16380.0,
                               182.0,
                               1.0};
  static const double theta13 = 5.371920351148152;

  const Eigen::Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const Eigen::MatrixXcd as = a / std::pow(2.0, squarings);

  const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd a2 = as * as;
  const Eigen::MatrixXcd a4 = a2 * a2;
  const Eigen::MatrixXcd a6 = a2 * a4;

  const Eigen::MatrixXcd u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
            b[5] * a4 + b[3] * a2 + b[1] * ident);
  const Eigen::MatrixXcd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                             b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

  Eigen::MatrixXcd r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) {
    r = r * r;
  }
  return r;
}

}  // namespace detail

Mat8 matrix_exp(const GeneratorMatrix& g, double t) {
  if (t < 0.0) {
    throw std::invalid_argument("matrix_exp: negative time");
  }
  if (t == 0.0) {
    return Mat8::Identity();
  }
  return detail::expm(g.m * t);
}

BlochVector propagate(const GeneratorMatrix& g, const BlochVector& q0,
                      double t) {
  if (std::abs(q0.population_sum() - 1.0) > 1e-6) {
    throw std::invalid_argument("propagate: initial state not normalized");
  }
  BlochVector out;
  out.q = matrix_exp(g, t) * q0.q;
  return out;
}

BlochVector steady_state(const GeneratorMatrix& g, const NumericsConfig& cfg) {
  if (g.params.rabi == 0.0) {
    throw DegenerateSteadyState(
        "steady_state: Omega = 0 leaves the ground manifolds disconnected; "
        "any ground mixture is stationary");
  }
  Eigen::JacobiSVD<Mat8> svd(g.m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = cfg.kernel_rank_rtol * sv(0);
  int null_dim = 0;
  for (int i = 0; i < 8; ++i) {
    if (sv(i) <= tol) ++null_dim;
  }
  if (null_dim != 1) {
    throw DegenerateSteadyState("steady_state: kernel dimension " +
                                std::to_string(null_dim) +
                                " (expected 1); no unique stationary state");
  }
  Vec8 v = svd.matrixV().col(7);
  const Complex pop = v[kA11] + v[kA22] + v[kA33] + v[kA44];
  if (std::abs(pop) < 1e-12) {
    throw DegenerateSteadyState(
        "steady_state: kernel vector carries no population");
  }
  BlochVector out;
  out.q = v / pop;
  return out;
}

double intensity(const BlochVector& q) {
  return (q.q[kA11] + q.q[kA22]).real();
}

}  // namespace qbeats
