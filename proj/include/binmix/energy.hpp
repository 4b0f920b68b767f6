#pragma once

// Bulk free-energy models for the binary mixture and the quadratization
// variables built on them.
//
// Every model exposes the bulk energy density h and its derivatives in the
// mass-density variables (rho1, rho2) that the time stepper works in.  Models
// whose natural variables are molar densities (Peng-Robinson) carry the molar
// masses and convert internally; rho_i = m_i * n_i.
//
// The quadratization variable is q = sqrt(h + A), with the shift A chosen so
// that h + A stays positive on a declared admissible box of states.

#include <array>
#include <memory>
#include <optional>

#include "binmix/grid.hpp"

namespace binmix {

// Rectangle of admissible states used when sampling the shift A.  For the
// Peng-Robinson model the coordinates are molar densities, otherwise mass
// densities.
struct SampleBox {
  double lo1 = 1e-3;
  double hi1 = 1.2;
  double lo2 = 1e-3;
  double hi2 = 1.2;
};

class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual double bulk_h(double rho1, double rho2) const = 0;
  virtual std::array<double, 2> bulk_grad_h(double rho1, double rho2) const = 0;
  // (h11, h12, h22), symmetric.
  virtual std::array<double, 3> bulk_hessian_h(double rho1, double rho2) const = 0;

  double shift() const { return shift_; }
  double m1() const { return m1_; }
  double m2() const { return m2_; }

  // q = sqrt(h + A); throws PositivityError if h + A <= 0 (shift too small
  // for the visited state).
  double q(double rho1, double rho2) const;
  // dq/drho_i = (dh/drho_i) / (2 q)
  std::array<double, 2> dq(double rho1, double rho2) const;

  // h relative to the tangent plane through a reference state; vanishes at
  // the reference and at any state sharing its common tangent.
  double tangent_shifted_h(double rho1, double rho2, double ref1, double ref2) const;

 protected:
  double shift_ = 1.0;
  double m1_ = 1.0;
  double m2_ = 1.0;
};

// h = rho1^2 (rho1 - 1)^2 + rho2^2 (rho2 - 1)^2
class DoubleWellEnergy : public EnergyModel {
 public:
  explicit DoubleWellEnergy(std::optional<double> shift = {});
  double bulk_h(double rho1, double rho2) const override;
  std::array<double, 2> bulk_grad_h(double rho1, double rho2) const override;
  std::array<double, 3> bulk_hessian_h(double rho1, double rho2) const override;
};

struct FloryHugginsParams {
  double chi = 2.5;        // interaction strength
  double n1 = 1.0;         // polymerization degrees
  double n2 = 1.0;
  double prefactor = 1.0;  // k_B T / m
};

// h = prefactor * rho * (c1/n1 ln c1 + c2/n2 ln c2 + chi c1 c2), c_i = rho_i/rho
class FloryHugginsEnergy : public EnergyModel {
 public:
  explicit FloryHugginsEnergy(const FloryHugginsParams& p,
                              const SampleBox& box = {},
                              std::optional<double> shift = {});
  double bulk_h(double rho1, double rho2) const override;
  std::array<double, 2> bulk_grad_h(double rho1, double rho2) const override;
  std::array<double, 3> bulk_hessian_h(double rho1, double rho2) const override;
  const FloryHugginsParams& params() const { return p_; }

 private:
  FloryHugginsParams p_;
};

struct PengRobinsonParams {
  double r_gas = 1.0;        // gas constant in working units
  double temperature = 1.0;  // fixed working temperature
  double tc1 = 1.0, pc1 = 1.0, w1 = 0.0, m1 = 1.0;  // critical data + molar mass
  double tc2 = 1.0, pc2 = 1.0, w2 = 0.0, m2 = 1.0;
  double k12 = 0.0;          // binary interaction parameter
  double eps_reg = 1e-6;     // regularization threshold for the ideal part
};

// Cubic equation-of-state free energy (ideal + repulsion + attraction) with a
// C^1 quadratic regularization of the ideal part below eps_reg.  Natural
// variables are molar densities (n1, n2); the mass-density interface divides
// through by the molar masses.
class PengRobinsonEnergy : public EnergyModel {
 public:
  explicit PengRobinsonEnergy(const PengRobinsonParams& p,
                              const SampleBox& molar_box = {0.0, 4.2, 0.0, 7.85},
                              std::optional<double> shift = {});

  double bulk_h(double rho1, double rho2) const override;
  std::array<double, 2> bulk_grad_h(double rho1, double rho2) const override;
  // finite difference of the analytic gradient (molar step 1e-5)
  std::array<double, 3> bulk_hessian_h(double rho1, double rho2) const override;

  // Molar-variable access (used by the command-line diagnostics and tests).
  double molar_h(double n1, double n2) const;
  std::array<double, 2> molar_grad_h(double n1, double n2) const;

  // Mixture coefficients at a state: a n^2 = sum_ij n_i n_j sqrt(a_i a_j)(1-k_ij)
  // and b n = sum_i n_i b_i.
  struct MixtureCoeffs {
    double an2 = 0.0;  // a * n^2
    double bn = 0.0;   // b * n
  };
  MixtureCoeffs mixture_coeffs(double n1, double n2) const;

  double a1() const { return a_[0]; }
  double a2() const { return a_[1]; }
  double b1() const { return b_[0]; }
  double b2() const { return b_[1]; }
  const PengRobinsonParams& params() const { return p_; }

 private:
  double ideal_h(double n, double* dh) const;  // one component's ideal part

  PengRobinsonParams p_;
  double a_[2] = {0.0, 0.0};
  double b_[2] = {0.0, 0.0};
  double a12_ = 0.0;  // sqrt(a1 a2) (1 - k12)
  double rt_ = 1.0;
};

// ---------------------------------------------------------------------------
// Field-level helpers (serial; they can throw domain errors per cell).
// ---------------------------------------------------------------------------

// q1 = sqrt(h + A) on the full extent (ghosts included); annotates thrown
// PositivityError with the offending slot.
void eq_vars(const EnergyModel& m, const CellField& rho1, const CellField& rho2,
             CellField& q1);

// dq/drho_i fields on the full extent.
void eq_slopes(const EnergyModel& m, const CellField& rho1, const CellField& rho2,
               CellField& p1, CellField& p2);

// Gradient-energy coefficient conversion between molar and mass variables:
// kappa_rho_ij = kappa_n_ij / (m_i m_j).
std::array<double, 3> mass_kappa_from_molar(const std::array<double, 3>& kn,
                                            double m1, double m2);
std::array<double, 3> molar_kappa_from_mass(const std::array<double, 3>& kr,
                                            double m1, double m2);

}  // namespace binmix
