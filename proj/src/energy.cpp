#include "binmix/energy.hpp"

#include <cmath>
#include <string>

#include "binmix/common.hpp"

namespace binmix {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kHessianStep = 1e-5;  // molar step for the EOS Hessian
constexpr int kShiftSamples = 64;      // per axis, when sampling the shift

std::string state_str(double r1, double r2) {
  return "(" + std::to_string(r1) + ", " + std::to_string(r2) + ")";
}

}  // namespace

// ======================================================================
// EnergyModel base
// ======================================================================

double EnergyModel::q(double rho1, double rho2) const {
  const double he = bulk_h(rho1, rho2) + shift_;
  if (he <= 0.0)
    throw PositivityError("quadratization shift exceeded: h + A <= 0 at state " +
                          state_str(rho1, rho2));
  return std::sqrt(he);
}

std::array<double, 2> EnergyModel::dq(double rho1, double rho2) const {
  const double qv = q(rho1, rho2);
  const std::array<double, 2> g = bulk_grad_h(rho1, rho2);
  return {g[0] / (2.0 * qv), g[1] / (2.0 * qv)};
}

double EnergyModel::tangent_shifted_h(double rho1, double rho2, double ref1,
                                      double ref2) const {
  const std::array<double, 2> g = bulk_grad_h(ref1, ref2);
  return bulk_h(rho1, rho2) - bulk_h(ref1, ref2) - g[0] * (rho1 - ref1) -
         g[1] * (rho2 - ref2);
}

// ======================================================================
// Double well
// ======================================================================

DoubleWellEnergy::DoubleWellEnergy(std::optional<double> shift) {
  shift_ = shift.value_or(1.0);
}

double DoubleWellEnergy::bulk_h(double rho1, double rho2) const {
  const double a = rho1 * (rho1 - 1.0);
  const double b = rho2 * (rho2 - 1.0);
  return a * a + b * b;
}

std::array<double, 2> DoubleWellEnergy::bulk_grad_h(double rho1, double rho2) const {
  return {2.0 * rho1 * (rho1 - 1.0) * (2.0 * rho1 - 1.0),
          2.0 * rho2 * (rho2 - 1.0) * (2.0 * rho2 - 1.0)};
}

std::array<double, 3> DoubleWellEnergy::bulk_hessian_h(double rho1, double rho2) const {
  return {12.0 * rho1 * rho1 - 12.0 * rho1 + 2.0, 0.0,
          12.0 * rho2 * rho2 - 12.0 * rho2 + 2.0};
}

// ======================================================================
// Flory-Huggins
// ======================================================================

namespace {

template <class Model>
double sampled_shift(const Model& m, const SampleBox& box) {
  double hmin = 0.0;
  bool first = true;
  for (int j = 0; j < kShiftSamples; ++j) {
    const double x2 = box.lo2 + (box.hi2 - box.lo2) * j / (kShiftSamples - 1);
    for (int i = 0; i < kShiftSamples; ++i) {
      const double x1 = box.lo1 + (box.hi1 - box.lo1) * i / (kShiftSamples - 1);
      double h;
      try {
        h = m.sample_h(x1, x2);
      } catch (const PositivityError&) {
        continue;  // e.g. beyond the packing limit in a box corner
      }
      if (first || h < hmin) {
        hmin = h;
        first = false;
      }
    }
  }
  if (first)
    throw ConfigError("energy shift sampling: admissible box contains no valid states");
  return 1.0 + std::abs(hmin);
}

}  // namespace

FloryHugginsEnergy::FloryHugginsEnergy(const FloryHugginsParams& p,
                                       const SampleBox& box,
                                       std::optional<double> shift)
    : p_(p) {
  if (shift) {
    shift_ = *shift;
  } else {
    struct Probe {
      const FloryHugginsEnergy* m;
      double sample_h(double a, double b) const { return m->bulk_h(a, b); }
    };
    try {
      shift_ = sampled_shift(Probe{this}, box);
    } catch (const PositivityError& e) {
      throw ConfigError(std::string("energy shift sampling failed: ") + e.what());
    }
  }
}

double FloryHugginsEnergy::bulk_h(double rho1, double rho2) const {
  if (rho1 <= 0.0 || rho2 <= 0.0)
    throw PositivityError("mixing energy undefined at state " + state_str(rho1, rho2),
                          -1, -1, rho1 <= 0.0 ? rho1 : rho2);
  const double rho = rho1 + rho2;
  const double c1 = rho1 / rho, c2 = rho2 / rho;
  return p_.prefactor *
         (rho1 / p_.n1 * std::log(c1) + rho2 / p_.n2 * std::log(c2) +
          p_.chi * rho1 * rho2 / rho);
}

std::array<double, 2> FloryHugginsEnergy::bulk_grad_h(double rho1, double rho2) const {
  if (rho1 <= 0.0 || rho2 <= 0.0)
    throw PositivityError("mixing energy undefined at state " + state_str(rho1, rho2),
                          -1, -1, rho1 <= 0.0 ? rho1 : rho2);
  const double rho = rho1 + rho2;
  const double c1 = rho1 / rho, c2 = rho2 / rho;
  const double g1 = std::log(c1) / p_.n1 + (1.0 - c1) / p_.n1 - c2 / p_.n2 +
                    p_.chi * c2 * c2;
  const double g2 = std::log(c2) / p_.n2 + (1.0 - c2) / p_.n2 - c1 / p_.n1 +
                    p_.chi * c1 * c1;
  return {p_.prefactor * g1, p_.prefactor * g2};
}

std::array<double, 3> FloryHugginsEnergy::bulk_hessian_h(double rho1, double rho2) const {
  if (rho1 <= 0.0 || rho2 <= 0.0)
    throw PositivityError("mixing energy undefined at state " + state_str(rho1, rho2),
                          -1, -1, rho1 <= 0.0 ? rho1 : rho2);
  const double rho = rho1 + rho2;
  const double c1 = rho1 / rho, c2 = rho2 / rho;
  const double h11 =
      (c2 / (p_.n1 * c1) - c2 / p_.n1 + c2 / p_.n2 - 2.0 * p_.chi * c2 * c2) / rho;
  const double h22 =
      (c1 / (p_.n2 * c2) - c1 / p_.n2 + c1 / p_.n1 - 2.0 * p_.chi * c1 * c1) / rho;
  const double h12 =
      (-c2 / p_.n1 - c1 / p_.n2 + 2.0 * p_.chi * c1 * c2) / rho;
  return {p_.prefactor * h11, p_.prefactor * h12, p_.prefactor * h22};
}

// ======================================================================
// Peng-Robinson
// ======================================================================

PengRobinsonEnergy::PengRobinsonEnergy(const PengRobinsonParams& p,
                                       const SampleBox& molar_box,
                                       std::optional<double> shift)
    : p_(p) {
  m1_ = p.m1;
  m2_ = p.m2;
  rt_ = p.r_gas * p.temperature;

  const double tc[2] = {p.tc1, p.tc2};
  const double pc[2] = {p.pc1, p.pc2};
  const double w[2] = {p.w1, p.w2};
  for (int i = 0; i < 2; ++i) {
    const double kap = 0.37464 + 1.54226 * w[i] - 0.26992 * w[i] * w[i];
    const double alpha = 1.0 + kap * (1.0 - std::sqrt(p.temperature / tc[i]));
    a_[i] = 0.45724 * p.r_gas * p.r_gas * tc[i] * tc[i] / pc[i] * alpha * alpha;
    b_[i] = 0.07780 * p.r_gas * tc[i] / pc[i];
  }
  a12_ = std::sqrt(a_[0] * a_[1]) * (1.0 - p.k12);

  if (shift) {
    shift_ = *shift;
  } else {
    struct Probe {
      const PengRobinsonEnergy* m;
      double sample_h(double n1, double n2) const {
        // skip states at or beyond the packing limit
        if (m->b_[0] * n1 + m->b_[1] * n2 >= 0.98)
          throw PositivityError("packing");
        return m->molar_h(n1, n2);
      }
    };
    shift_ = sampled_shift(Probe{this}, molar_box);
  }
}

double PengRobinsonEnergy::ideal_h(double n, double* dh) const {
  const double eps = p_.eps_reg;
  if (n >= eps) {
    const double ln = std::log(n);
    if (dh) *dh = rt_ * ln;
    return rt_ * n * (ln - 1.0);
  }
  // C^1 quadratic continuation below eps
  const double le = std::log(eps);
  if (dh) *dh = rt_ * (le - 1.0 + n / eps);
  return rt_ * (n * (le - 1.0) + 0.5 * n * n / eps - 0.5 * eps);
}

PengRobinsonEnergy::MixtureCoeffs PengRobinsonEnergy::mixture_coeffs(double n1,
                                                                     double n2) const {
  MixtureCoeffs c;
  c.an2 = a_[0] * n1 * n1 + 2.0 * a12_ * n1 * n2 + a_[1] * n2 * n2;
  c.bn = b_[0] * n1 + b_[1] * n2;
  return c;
}

double PengRobinsonEnergy::molar_h(double n1, double n2) const {
  const MixtureCoeffs c = mixture_coeffs(n1, n2);
  if (c.bn >= 1.0)
    throw PositivityError("repulsion singular (bn >= 1) at molar state " +
                          state_str(n1, n2), -1, -1, c.bn);
  if (1.0 + (1.0 + kSqrt2) * c.bn <= 0.0)
    throw PositivityError("attraction undefined at molar state " + state_str(n1, n2),
                          -1, -1, c.bn);
  const double n = n1 + n2;
  const double hid = ideal_h(n1, nullptr) + ideal_h(n2, nullptr);
  const double hrep = -n * rt_ * std::log(1.0 - c.bn);
  double hatt;
  if (std::abs(c.bn) < 1e-8) {
    hatt = -c.an2 * (1.0 - c.bn);  // series limit, avoids 0/0
  } else {
    const double lratio = std::log((1.0 + (1.0 - kSqrt2) * c.bn) /
                                   (1.0 + (1.0 + kSqrt2) * c.bn));
    hatt = c.an2 / (2.0 * kSqrt2 * c.bn) * lratio;
  }
  return hid + hrep + hatt;
}

std::array<double, 2> PengRobinsonEnergy::molar_grad_h(double n1, double n2) const {
  const MixtureCoeffs c = mixture_coeffs(n1, n2);
  if (c.bn >= 1.0)
    throw PositivityError("repulsion singular (bn >= 1) at molar state " +
                          state_str(n1, n2), -1, -1, c.bn);
  if (1.0 + (1.0 + kSqrt2) * c.bn <= 0.0)
    throw PositivityError("attraction undefined at molar state " + state_str(n1, n2),
                          -1, -1, c.bn);
  const double n = n1 + n2;
  const double da[2] = {2.0 * (a_[0] * n1 + a12_ * n2),
                        2.0 * (a12_ * n1 + a_[1] * n2)};

  std::array<double, 2> g{};
  for (int i = 0; i < 2; ++i) {
    double did;
    ideal_h(i == 0 ? n1 : n2, &did);
    const double bi = b_[i];
    const double drep = -rt_ * std::log(1.0 - c.bn) + n * rt_ * bi / (1.0 - c.bn);
    double datt;
    if (std::abs(c.bn) < 1e-8) {
      datt = -da[i] * (1.0 - c.bn) + c.an2 * bi;
    } else {
      const double lo = 1.0 + (1.0 - kSqrt2) * c.bn;
      const double hi = 1.0 + (1.0 + kSqrt2) * c.bn;
      const double lratio = std::log(lo / hi);
      datt = da[i] / (2.0 * kSqrt2 * c.bn) * lratio -
             c.an2 * bi / (2.0 * kSqrt2 * c.bn * c.bn) * lratio -
             c.an2 * bi / (c.bn * lo * hi);
    }
    g[i] = did + drep + datt;
  }
  return g;
}

double PengRobinsonEnergy::bulk_h(double rho1, double rho2) const {
  return molar_h(rho1 / m1_, rho2 / m2_);
}

std::array<double, 2> PengRobinsonEnergy::bulk_grad_h(double rho1, double rho2) const {
  const std::array<double, 2> g = molar_grad_h(rho1 / m1_, rho2 / m2_);
  return {g[0] / m1_, g[1] / m2_};
}

std::array<double, 3> PengRobinsonEnergy::bulk_hessian_h(double rho1, double rho2) const {
  const double n1 = rho1 / m1_, n2 = rho2 / m2_;
  const double d = kHessianStep;
  const std::array<double, 2> gp1 = molar_grad_h(n1 + d, n2);
  const std::array<double, 2> gm1 = molar_grad_h(n1 - d, n2);
  const std::array<double, 2> gp2 = molar_grad_h(n1, n2 + d);
  const std::array<double, 2> gm2 = molar_grad_h(n1, n2 - d);
  const double h11 = (gp1[0] - gm1[0]) / (2.0 * d);
  const double h22 = (gp2[1] - gm2[1]) / (2.0 * d);
  const double h12 =
      0.5 * ((gp2[0] - gm2[0]) / (2.0 * d) + (gp1[1] - gm1[1]) / (2.0 * d));
  return {h11 / (m1_ * m1_), h12 / (m1_ * m2_), h22 / (m2_ * m2_)};
}

// ======================================================================
// Field helpers
// ======================================================================

void eq_vars(const EnergyModel& m, const CellField& rho1, const CellField& rho2,
             CellField& q1) {
  for (int j = 0; j < q1.height(); ++j)
    for (int i = 0; i < q1.width(); ++i) {
      try {
        q1(i, j) = m.q(rho1(i, j), rho2(i, j));
      } catch (PositivityError& e) {
        e.cell_i = i;
        e.cell_j = j;
        throw;
      }
    }
}

void eq_slopes(const EnergyModel& m, const CellField& rho1, const CellField& rho2,
               CellField& p1, CellField& p2) {
  for (int j = 0; j < p1.height(); ++j)
    for (int i = 0; i < p1.width(); ++i) {
      try {
        const std::array<double, 2> p = m.dq(rho1(i, j), rho2(i, j));
        p1(i, j) = p[0];
        p2(i, j) = p[1];
      } catch (PositivityError& e) {
        e.cell_i = i;
        e.cell_j = j;
        throw;
      }
    }
}

std::array<double, 3> mass_kappa_from_molar(const std::array<double, 3>& kn,
                                            double m1, double m2) {
  return {kn[0] / (m1 * m1), kn[1] / (m1 * m2), kn[2] / (m2 * m2)};
}

std::array<double, 3> molar_kappa_from_mass(const std::array<double, 3>& kr,
                                            double m1, double m2) {
  return {kr[0] * (m1 * m1), kr[1] * (m1 * m2), kr[2] * (m2 * m2)};
}

}  // namespace binmix
