#include "qbeats/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "qbeats/errors.hpp"

namespace qbeats {

BeatFrequencies rabi_frequencies(const SystemParams& params) {
  const double om = params.rabi;
  const double dl = params.laser_detuning;
  const double dz = params.zeeman_diff;
  BeatFrequencies b;
  b.omega1 = std::sqrt(4.0 * om * om + dl * dl);
  b.omega2 = std::sqrt(4.0 * om * om + (dz - dl) * (dz - dl));
  b.omega_av = 0.5 * (b.omega2 + b.omega1);
  b.omega_beat = 0.5 * (b.omega2 - b.omega1);
  return b;
}

PropagatorTable::PropagatorTable(const Mat8& m, double horizon, int max_level)
    : m_(m), horizon_(horizon), max_level_(max_level) {
  if (horizon < 0.0) {
    throw std::invalid_argument("PropagatorTable: negative horizon");
  }
  if (max_level < 1 || max_level > 30) {
    throw std::invalid_argument("PropagatorTable: max_level out of range");
  }
}

const Mat8& PropagatorTable::at(std::uint32_t idx) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(idx);
    if (it != cache_.end()) return *it->second;
  }
  // Each entry is a pure function of idx; racing threads compute the same
  // bits and the first insert wins.
  auto entry = std::make_unique<Mat8>();
  if (idx == 0) {
    *entry = Mat8::Identity();
  } else {
    const double tau =
        horizon_ * static_cast<double>(idx) / static_cast<double>(1u << max_level_);
    *entry = detail::expm(m_ * tau);
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.try_emplace(idx, std::move(entry));
  return *it->second;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double z) {
  if (std::abs(z) < 1e-4) {
    const double z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

// One spectrum point of the double time integral
//   prefactor * Re int_0^t dt1 e^{-outer_decay (t-t1)}
//                  int_0^{t-t1} dtau e^{s tau} [g13 + g24](t1, tau)
// shared between the filtered spectrum (s = Gamma/2 - i nu) and the
// perfect-resolution spectrum (s = -i nu, no outer decay).
class DoubleTimeIntegral {
 public:
  DoubleTimeIntegral(const PropagatorTable& table, const Vec8& q0, Complex s,
                     double outer_decay, const NumericsConfig& cfg)
      : table_(table),
        q0_(q0),
        s_(s),
        outer_decay_(outer_decay),
        cfg_(cfg) {
    const Mat8& m = table.generator();
    Mat8 a = m;
    a.diagonal().array() += s;
    Eigen::JacobiSVD<Mat8> svd(a);
    const double smin = svd.singularValues()(7);
    const double smax = svd.singularValues()(0);
    resolvent_ok_ = smin > 0.0 && smax / smin < cfg.resolvent_cond_max;
    if (resolvent_ok_) {
      // Rows A31 and A42 of (sI + M)^{-1}, via transposed solves.
      Eigen::PartialPivLU<Mat8> lu(a.transpose());
      Vec8 e = Vec8::Zero();
      e[kA31] = 1.0;
      r4_ = lu.solve(e);
      e[kA31] = 0.0;
      e[kA42] = 1.0;
      r6_ = lu.solve(e);
    } else {
      shifted_ = a;
    }
    norm1_ = m.cwiseAbs().colwise().sum().maxCoeff();
  }

  double evaluate(double prefactor) const {
    const double t = table_.horizon();
    if (t == 0.0) return 0.0;
    const int max_level = table_.max_level();
    const std::uint32_t n = 1u << max_level;

    // Skip convergence checks while the panels cannot resolve the fastest
    // oscillation of the integrand (frequency bounded by |Im s| + ||M||_1).
    const double freq_bound = std::abs(s_.imag()) + norm1_;
    const double cycles = freq_bound * t / (2.0 * kPi);
    int check_from = 3;
    if (cycles > 1.0) {
      const int min_level =
          static_cast<int>(std::ceil(std::log2(6.0 * cycles)));
      check_from = std::clamp(min_level, 3, max_level - 1);
    }

    Complex trap = 0.5 * t * (node(0, n) + node(n, n));
    Complex trap_prev = trap;
    Complex simpson_prev = trap;
    bool previous_level_converged = false;
    for (int level = 1; level <= max_level; ++level) {
      const std::uint32_t step = n >> level;
      Complex add = 0.0;
      for (std::uint32_t j = step; j < n; j += 2 * step) {
        add += node(j, n);
      }
      trap = 0.5 * trap + (t / static_cast<double>(1u << level)) * add;
      const Complex simpson =
          level == 1 ? trap : (4.0 * trap - trap_prev) / 3.0;
      if (level >= check_from) {
        const double change = std::abs(simpson - simpson_prev);
        const bool converged =
            change <= std::max(cfg_.quad_rel_tol * std::abs(simpson),
                               cfg_.quad_abs_floor);
        // One small change can be accidental on an oscillatory integrand;
        // accept only once two successive halvings both stay inside the
        // contract.
        if (converged && previous_level_converged) {
          return prefactor * simpson.real();
        }
        previous_level_converged = converged;
      }
      trap_prev = trap;
      simpson_prev = simpson;
    }
    std::ostringstream msg;
    msg << "time quadrature not converged at " << n << " panels (rel tol "
        << cfg_.quad_rel_tol << ")";
    throw QuadratureNotConverged(msg.str());
  }

 private:
  // Integrand at outer node t1 = t * idx / n.
  Complex node(std::uint32_t idx, std::uint32_t n) const {
    const double t = table_.horizon();
    const Vec8 q1 = table_.at(idx) * q0_;
    const Complex a11 = q1[kA11];
    const Complex a13 = q1[kA13];
    const Complex a22 = q1[kA22];
    const Complex a24 = q1[kA24];
    const std::uint32_t ridx = n - idx;
    const double delay = t * static_cast<double>(ridx) / static_cast<double>(n);

    Complex h;
    if (resolvent_ok_) {
      const Mat8& et = table_.at(ridx);
      const Vec8 xu = et.col(kA31) * a11 + et.col(kA33) * a13;
      const Vec8 xv = et.col(kA42) * a22 + et.col(kA44) * a24;
      const Complex es = std::exp(s_ * delay);
      h = es * ((r4_.array() * xu.array()).sum() +
                (r6_.array() * xv.array()).sum()) -
          (r4_[kA31] * a11 + r4_[kA33] * a13 + r6_[kA42] * a22 +
           r6_[kA44] * a24);
    } else {
      // (sI + M) is (near) singular: evaluate int_0^delay e^{(sI+M)tau} dtau
      // exactly as the top-right block of an augmented matrix exponential.
      Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(16, 16);
      aug.topLeftCorner<8, 8>() = shifted_ * delay;
      aug.topRightCorner<8, 8>() =
          Eigen::MatrixXcd::Identity(8, 8) * delay;
      const Eigen::MatrixXcd k = detail::expm(aug).topRightCorner<8, 8>();
      h = k(kA31, kA31) * a11 + k(kA31, kA33) * a13 + k(kA42, kA42) * a22 +
          k(kA42, kA44) * a24;
    }
    return std::exp(-outer_decay_ * delay) * h;
  }

  const PropagatorTable& table_;
  Vec8 q0_;
  Complex s_;
  double outer_decay_;
  NumericsConfig cfg_;
  bool resolvent_ok_ = false;
  Vec8 r4_ = Vec8::Zero();
  Vec8 r6_ = Vec8::Zero();
  Mat8 shifted_ = Mat8::Zero();
  double norm1_ = 0.0;
};

void require_filter(const FilterSettings& f) {
  if (!(f.bandwidth > 0.0)) {
    throw std::invalid_argument("FilterSettings: bandwidth must be > 0");
  }
}

}  // namespace

double ew_spectrum(const GeneratorMatrix& g, const BlochVector& q0,
                   const FilterSettings& f, double t,
                   const PropagatorTable& table, const NumericsConfig& cfg) {
  require_filter(f);
  if (t < 0.0) {
    throw std::invalid_argument("ew_spectrum: negative time");
  }
  if (t == 0.0) return 0.0;
  if (std::abs(table.horizon() - t) > 1e-12 * std::max(1.0, t)) {
    throw std::invalid_argument("ew_spectrum: table horizon does not match t");
  }
  if ((table.generator() - g.m).cwiseAbs().maxCoeff() > 1e-14) {
    throw std::invalid_argument("ew_spectrum: table built for another generator");
  }
  const Complex s(0.5 * f.bandwidth, -f.nu);
  DoubleTimeIntegral integral(table, q0.q, s, f.bandwidth, cfg);
  try {
    return integral.evaluate(2.0 * f.bandwidth);
  } catch (const QuadratureNotConverged& e) {
    std::ostringstream msg;
    msg << "ew_spectrum(nu=" << f.nu << ", t=" << t
        << ", Gamma=" << f.bandwidth << "): " << e.what();
    throw QuadratureNotConverged(msg.str());
  }
}

double ew_spectrum(const GeneratorMatrix& g, const BlochVector& q0,
                   const FilterSettings& f, double t,
                   const NumericsConfig& cfg) {
  require_filter(f);
  if (t < 0.0) {
    throw std::invalid_argument("ew_spectrum: negative time");
  }
  if (t == 0.0) return 0.0;
  PropagatorTable table(g.m, t, cfg.max_quad_levels);
  return ew_spectrum(g, q0, f, t, table, cfg);
}

double se_spectrum_analytic(double gamma, double delta,
                            const FilterSettings& f, double t,
                            const NumericsConfig& cfg) {
  require_filter(f);
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("se_spectrum_analytic: gamma must be > 0");
  }
  if (t < 0.0) {
    throw std::invalid_argument("se_spectrum_analytic: negative time");
  }
  const double bw = f.bandwidth;
  if (std::abs(gamma - bw) < cfg.narrowing_switch_rtol * gamma) {
    return se_spectrum_narrowing_limit(gamma, delta, f.nu, t);
  }
  // F(t,x) in the cancellation-free form
  //   2 Gamma [ (e^{-Gamma t/2} - e^{-gamma t/2})^2
  //             + 4 e^{-(gamma+Gamma)t/2} sin^2((nu+x) t/2) ].
  const double diff =
      std::exp(-gamma * t / 2.0) * std::expm1((gamma - bw) * t / 2.0);
  const double mid = std::exp(-(gamma + bw) * t / 2.0);
  const auto big_f = [&](double x) {
    const double osc = std::sin((f.nu + x) * t / 2.0);
    return 2.0 * bw * (diff * diff + 4.0 * mid * osc * osc);
  };
  const double w2 = (gamma - bw) * (gamma - bw);
  return big_f(0.0) / (w2 + 4.0 * f.nu * f.nu) +
         big_f(delta) / (w2 + 4.0 * (f.nu + delta) * (f.nu + delta));
}

double se_spectrum_narrowing_limit(double gamma, double delta, double nu,
                                   double t) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument(
        "se_spectrum_narrowing_limit: gamma must be > 0");
  }
  if (t < 0.0) {
    throw std::invalid_argument("se_spectrum_narrowing_limit: negative time");
  }
  const double s1 = sinc(nu * t / 2.0);
  const double s2 = sinc((nu + delta) * t / 2.0);
  return 0.5 * gamma * t * t * std::exp(-gamma * t) * (s1 * s1 + s2 * s2);
}

double wk_spectrum(const GeneratorMatrix& g, double nu, double broadening,
                   const NumericsConfig& cfg) {
  if (broadening < 0.0) {
    throw std::invalid_argument("wk_spectrum: negative broadening");
  }
  const BlochVector ss = steady_state(g, cfg);
  if (broadening == 0.0) {
    throw SingularResolvent(
        "wk_spectrum: zero broadening hits the stationary eigenvalue of M "
        "(elastic delta peak); use a positive broadening");
  }
  Mat8 b = -g.m;
  b.diagonal().array() += Complex(broadening, nu);
  Eigen::PartialPivLU<Mat8> lu(b);
  Vec8 u0 = Vec8::Zero();
  u0[kA31] = ss.q[kA11];
  u0[kA33] = ss.q[kA13];
  Vec8 v0 = Vec8::Zero();
  v0[kA42] = ss.q[kA22];
  v0[kA44] = ss.q[kA24];
  const Vec8 x = lu.solve(u0);
  const Vec8 y = lu.solve(v0);
  return (x[kA31] + y[kA42]).real();
}

double perfect_resolution_spectrum(const GeneratorMatrix& g,
                                   const BlochVector& q0, double nu,
                                   double horizon, const PropagatorTable& table,
                                   const NumericsConfig& cfg) {
  if (horizon < 0.0) {
    throw std::invalid_argument("perfect_resolution_spectrum: negative horizon");
  }
  if (horizon == 0.0) return 0.0;
  if (std::abs(table.horizon() - horizon) > 1e-12 * std::max(1.0, horizon)) {
    throw std::invalid_argument(
        "perfect_resolution_spectrum: table horizon mismatch");
  }
  if ((table.generator() - g.m).cwiseAbs().maxCoeff() > 1e-14) {
    throw std::invalid_argument(
        "perfect_resolution_spectrum: table built for another generator");
  }
  const Complex s(0.0, -nu);
  DoubleTimeIntegral integral(table, q0.q, s, 0.0, cfg);
  try {
    return integral.evaluate(2.0);
  } catch (const QuadratureNotConverged& e) {
    std::ostringstream msg;
    msg << "perfect_resolution_spectrum(nu=" << nu << ", T=" << horizon
        << "): " << e.what();
    throw QuadratureNotConverged(msg.str());
  }
}

double perfect_resolution_spectrum(const GeneratorMatrix& g,
                                   const BlochVector& q0, double nu,
                                   double horizon, const NumericsConfig& cfg) {
  if (horizon < 0.0) {
    throw std::invalid_argument("perfect_resolution_spectrum: negative horizon");
  }
  if (horizon == 0.0) return 0.0;
  PropagatorTable table(g.m, horizon, cfg.max_quad_levels);
  return perfect_resolution_spectrum(g, q0, nu, horizon, table, cfg);
}

SpectrumGrid spectrum_grid(const GeneratorMatrix& g, const BlochVector& q0,
                           const std::vector<double>& nus,
                           const std::vector<double>& times, double bandwidth,
                           const NumericsConfig& cfg, int threads) {
  if (nus.empty() || times.empty()) {
    throw std::invalid_argument("spectrum_grid: empty grid");
  }
  if (!std::is_sorted(nus.begin(), nus.end()) ||
      std::adjacent_find(nus.begin(), nus.end()) != nus.end()) {
    throw std::invalid_argument("spectrum_grid: nus not strictly increasing");
  }
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end()) {
    throw std::invalid_argument("spectrum_grid: times not strictly increasing");
  }

  SpectrumGrid grid;
  grid.nus = nus;
  grid.times = times;
  grid.values.resize(static_cast<Eigen::Index>(nus.size()),
                     static_cast<Eigen::Index>(times.size()));
  grid.meta.params = g.params;
  grid.meta.filter_bandwidth = bandwidth;

  std::vector<std::unique_ptr<PropagatorTable>> tables;
  tables.reserve(times.size());
  for (double t : times) {
    tables.push_back(
        std::make_unique<PropagatorTable>(g.m, t, cfg.max_quad_levels));
  }

  const std::size_t total = nus.size() * times.size();
  const int nthreads =
      std::max(1, std::min<int>(threads, static_cast<int>(total)));

  struct Failure {
    std::size_t flat;
    std::string message;
  };
  std::mutex failure_mu;
  std::vector<Failure> failures;

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t flat = begin; flat < end; ++flat) {
      const std::size_t i = flat / times.size();
      const std::size_t j = flat % times.size();
      FilterSettings f{bandwidth, nus[i]};
      try {
        grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            times[j] == 0.0
                ? 0.0
                : ew_spectrum(g, q0, f, times[j], *tables[j], cfg);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mu);
        failures.push_back({flat, e.what()});
        return;
      }
    }
  };

  if (nthreads == 1) {
    worker(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + nthreads - 1) / nthreads;
    for (int k = 0; k < nthreads; ++k) {
      const std::size_t begin = chunk * static_cast<std::size_t>(k);
      const std::size_t end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  if (!failures.empty()) {
    auto worst = std::min_element(
        failures.begin(), failures.end(),
        [](const Failure& a, const Failure& b) { return a.flat < b.flat; });
    const std::size_t i = worst->flat / times.size();
    const std::size_t j = worst->flat % times.size();
    std::ostringstream msg;
    msg << "spectrum_grid at (nu=" << nus[i] << ", t=" << times[j]
        << "): " << worst->message;
    throw QuadratureNotConverged(msg.str());
  }
  return grid;
}

}  // namespace qbeats
