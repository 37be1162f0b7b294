#include "ptransit/pcf.hpp"

#include <cmath>
#include <sstream>

namespace ptransit {

namespace {

// Lanczos g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

Complex log_gamma_core(Complex z) {
  // valid for Re z >= 0.5
  z -= 1.0;
  Complex a = kLanczos[0];
  Complex t = z + 7.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + double(i));
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

Complex log_gamma(Complex z) {
  if (z.real() < 0.5) {
    // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return std::log(kPi) - std::log(std::sin(kPi * z)) - log_gamma_core(1.0 - z);
  }
  return log_gamma_core(z);
}

Complex gamma_fn(Complex z) { return std::exp(log_gamma(z)); }

Complex inv_gamma(Complex z) {
  if (z.real() < 0.5) {
    // entire continuation through the poles
    return std::sin(kPi * z) * std::exp(log_gamma_core(1.0 - z)) / kPi;
  }
  return std::exp(-log_gamma_core(z));
}

namespace {

struct SeriesResult {
  Complex value;
  Complex derivative;
  double est_error;
};

// Maclaurin solution of y'' + (mu + 1/2 - z^2/4) y = 0 from the standard
// initial values D_mu(0), D_mu'(0).
SeriesResult pcf_series(Complex mu, Complex z) {
  const Complex d0 = std::pow(2.0, mu / 2.0) * std::sqrt(kPi) *
                     inv_gamma((1.0 - mu) / 2.0);
  const Complex d1 = -std::pow(2.0, (mu + 1.0) / 2.0) * std::sqrt(kPi) *
                     inv_gamma(-mu / 2.0);

  if (std::abs(z) < 1e-300) {
    return {d0, d1, 1e-15};
  }

  const Complex lam = mu + 0.5;
  const int kmax = 400;
  // coefficients c_k of sum c_k z^k, c_{k+2} = (c_{k-2}/4 - lam c_k)/((k+1)(k+2))
  Complex c[4] = {d0, d1, -lam * d0 / 2.0, -lam * d1 / 6.0};
  Complex value = c[0] + z * (c[1] + z * (c[2] + z * c[3]));
  Complex deriv = c[1] + z * (2.0 * c[2] + z * 3.0 * c[3]);
  Complex zkm1 = z * z;  // z^{k-1} for k = 3
  double peak = std::abs(value);
  Complex cm4 = c[0], cm3 = c[1], cm2 = c[2], cm1 = c[3];
  int quiet = 0;
  for (int k = 4; k < kmax; ++k) {
    Complex ck = (0.25 * cm4 - lam * cm2) / double(k * (k - 1));
    zkm1 *= z;  // z^{k-1}
    Complex term = ck * zkm1 * z;
    value += term;
    deriv += double(k) * ck * zkm1;
    peak = std::max(peak, std::abs(value));
    cm4 = cm3; cm3 = cm2; cm2 = cm1; cm1 = ck;
    if (std::abs(term) <= 1e-17 * (peak + 1e-300)) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  SeriesResult r;
  r.value = value;
  r.derivative = deriv;
  double denom = std::max(std::abs(value), 1e-300);
  r.est_error = 2e-16 * peak / denom + 1e-15;
  return r;
}

struct AsymSeries {
  Complex sum;       // sum over the algebraic series
  Complex dsum_dz;   // its z-derivative
  double tail;       // magnitude of the first omitted term (relative)
};

// Dominant algebraic factor of e^{-z^2/4} z^mu: 1 - mu(mu-1)/(2z^2) + ...
AsymSeries asym_dominant(Complex mu, Complex z) {
  Complex z2 = z * z;
  Complex term = 1.0, sum = 1.0, dsum = 0.0;
  double prev = 1.0;
  AsymSeries out{1.0, 0.0, 1.0};
  for (int m = 0; m < 60; ++m) {
    Complex next = term * (-(mu - 2.0 * m) * (mu - 2.0 * m - 1.0)) /
                   (2.0 * double(m + 1) * z2);
    double mag = std::abs(next);
    if (mag >= prev) {  // optimal truncation
      out.tail = mag;
      break;
    }
    sum += next;
    dsum += next * Complex(-2.0 * (m + 1)) / z;
    term = next;
    prev = mag;
    out.tail = mag;
  }
  out.sum = sum;
  out.dsum_dz = dsum;
  return out;
}

// Subdominant algebraic factor of e^{+z^2/4} z^{-mu-1}: 1 + (mu+1)(mu+2)/(2z^2) + ...
AsymSeries asym_subdominant(Complex mu, Complex z) {
  Complex z2 = z * z;
  Complex term = 1.0, sum = 1.0, dsum = 0.0;
  double prev = 1.0;
  AsymSeries out{1.0, 0.0, 1.0};
  for (int m = 0; m < 60; ++m) {
    Complex next = term * ((mu + 2.0 * m + 1.0) * (mu + 2.0 * m + 2.0)) /
                   (2.0 * double(m + 1) * z2);
    double mag = std::abs(next);
    if (mag >= prev) {
      out.tail = mag;
      break;
    }
    sum += next;
    dsum += next * Complex(-2.0 * (m + 1)) / z;
    term = next;
    prev = mag;
    out.tail = mag;
  }
  out.sum = sum;
  out.dsum_dz = dsum;
  return out;
}

bool on_ray(Complex z, double ray, double tol) {
  double a = std::arg(z);
  return std::abs(a - ray) <= tol;
}

PcfEvaluation pcf_eval(Complex mu, Complex z, const PcfOptions& opts) {
  PcfEvaluation out;
  if (std::abs(z) <= opts.z_switch) {
    SeriesResult s = pcf_series(mu, z);
    out.value = s.value;
    out.derivative = s.derivative;
    out.regime = PcfRegime::series;
    out.est_error = s.est_error;
    return out;
  }

  const bool principal_ray = on_ray(z, -kPi / 4.0, opts.ray_tol);
  const bool extended_ray = on_ray(z, 3.0 * kPi / 4.0, opts.ray_tol);
  if (!principal_ray && !extended_ray) {
    std::ostringstream os;
    os << "pcf: |z| = " << std::abs(z) << " with arg z = " << std::arg(z)
       << " is off the supported rays";
    throw AssumptionError(os.str());
  }

  Complex gauss = std::exp(-z * z / 4.0);
  Complex zmu = std::exp(mu * std::log(z));
  AsymSeries dom = asym_dominant(mu, z);
  Complex value = zmu * gauss * dom.sum;
  Complex deriv = zmu * gauss * ((mu / z - z / 2.0) * dom.sum + dom.dsum_dz);
  double tail = dom.tail;

  if (extended_ray) {
    Complex xi = pcf_xi(mu) * std::exp(2.0 * kI * kPi * mu);
    Complex zmun = std::exp((-mu - 1.0) * std::log(z));
    Complex agauss = std::exp(z * z / 4.0);
    AsymSeries sub = asym_subdominant(mu, z);
    value += xi * zmun * agauss * sub.sum;
    deriv += xi * zmun * agauss *
             ((z / 2.0 - (mu + 1.0) / z) * sub.sum + sub.dsum_dz);
    tail = std::max(tail, std::abs(xi) * sub.tail);
  }

  out.value = value;
  out.derivative = deriv;
  out.regime = PcfRegime::asymptotic;
  out.est_error = tail + 1e-14;
  return out;
}

void check_order(Complex nu, const PcfOptions& opts) {
  if (!opts.check_order) return;
  if (std::abs(nu.real()) > 1e-12 * (1.0 + std::abs(nu)))
    throw AssumptionError("pcf: order must be purely imaginary");
  if (std::abs(nu) > 100.0)
    throw AssumptionError("pcf: |nu| > 100 is outside the supported range");
}

}  // namespace

Complex pcf_xi(Complex nu) {
  return -std::sqrt(2.0 * kPi) * std::exp(-kI * kPi * nu) * inv_gamma(-nu);
}

PcfEvaluation pcf_d(Complex nu, Complex z, const PcfOptions& opts) {
  check_order(nu, opts);
  return pcf_eval(nu, z, opts);
}

PcfEvaluation pcf_d_down(Complex nu, Complex z, const PcfOptions& opts) {
  check_order(nu, opts);
  return pcf_eval(nu - 1.0, z, opts);
}

Complex pcf_asymptotic(Complex nu, Complex z, PcfSector sector,
                       const PcfOptions& opts) {
  check_order(nu, opts);
  double a = std::arg(z);
  if (sector == PcfSector::principal) {
    if (!(a > -3.0 * kPi / 4.0 && a < 3.0 * kPi / 4.0))
      throw AssumptionError("pcf_asymptotic: arg z outside the principal sector");
    AsymSeries dom = asym_dominant(nu, z);
    return std::exp(nu * std::log(z)) * std::exp(-z * z / 4.0) * dom.sum;
  }
  // extended sector (pi/4, 5pi/4), i.e. (pi/4, pi] plus the wrapped branch
  if (!(a > kPi / 4.0 || a < -3.0 * kPi / 4.0))
    throw AssumptionError("pcf_asymptotic: arg z outside the extended sector");
  AsymSeries dom = asym_dominant(nu, z);
  AsymSeries sub = asym_subdominant(nu, z);
  return std::exp(nu * std::log(z)) * std::exp(-z * z / 4.0) * dom.sum +
         pcf_xi(nu) * std::exp(2.0 * kI * kPi * nu) *
             std::exp((-nu - 1.0) * std::log(z)) * std::exp(z * z / 4.0) * sub.sum;
}

PcfLimitForm pcf_limit_form(Complex nu, double tau, Complex sigma, double b,
                            int side, bool down_order) {
  if (std::abs(tau) < 10.0)
    throw AssumptionError("pcf_limit_form: |tau| must be >= 10");
  Complex arg_point = double(side) * sigma * (tau + b);
  double ray = std::arg(arg_point);
  bool dominant_ray = std::abs(ray + kPi / 4.0) < 1e-9;
  bool subdominant_ray = std::abs(ray - 3.0 * kPi / 4.0) < 1e-9;
  if (!dominant_ray && !subdominant_ray)
    throw AssumptionError("pcf_limit_form: point is off the matching rays");

  double ray_tau = std::arg(double(side) * sigma * tau);
  Complex st = std::abs(sigma * tau);
  Complex gauss = std::exp(-sigma * sigma * (tau + b) * (tau + b) / 4.0);

  PcfLimitForm out;
  if (!down_order) {
    // D_nu: dominant Gaussian-on-ray term on either ray
    out.leading = std::exp(kI * nu * ray_tau) * std::pow(st, nu) * gauss;
    out.kind = PcfLimitKind::dominant;
    out.remainder_bound = (1.0 + std::abs(nu) * std::abs(nu)) / std::abs(tau);
    return out;
  }
  if (dominant_ray) {
    out.leading = 0.0;
    out.kind = PcfLimitKind::decaying;
    out.remainder_bound = (1.0 + std::abs(nu)) / std::abs(tau);
    return out;
  }
  out.leading = std::exp(-kI * nu * ray_tau) * pcf_xi(nu - 1.0) *
                std::exp(2.0 * kI * kPi * nu) * std::pow(st, -nu) / gauss;
  out.kind = PcfLimitKind::subdominant;
  out.remainder_bound = (1.0 + std::abs(nu) * std::abs(nu)) / std::abs(tau);
  return out;
}

}  // namespace ptransit
