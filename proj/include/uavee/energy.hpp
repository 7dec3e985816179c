// Rotary-wing propulsion power, per-step energy ledger and energy efficiency.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace uavee {

/// Sign of the V^2/(2 v0^2) term inside the induced-power radical.
/// `AsPrinted` uses "+"; `Standard` uses the "-" of the usual rotary-wing model.
enum class InducedSign { AsPrinted, Standard };

struct PowerModelParams {
  double kappa0 = 79.85;  // blade profile, W
  double kappa1 = 88.63;  // induced, W
  double kappa2 = 0.018;  // parasite, kg/m
  double u_tip = 120.0;   // m/s
  double v0 = 4.03;       // mean rotor induced velocity in hover, m/s
  InducedSign induced_sign = InducedSign::AsPrinted;

  void validate() const;
};

template <typename Scalar>
Scalar propulsion_power(Scalar v, const PowerModelParams& p) {
  if (v < Scalar(0)) throw std::domain_error("propulsion_power: negative speed");
  const Scalar v2 = v * v;
  const Scalar v02 = Scalar(p.v0 * p.v0);
  const Scalar blade = Scalar(p.kappa0) * (Scalar(1) + Scalar(3) * v2 / Scalar(p.u_tip * p.u_tip));
  const Scalar radical = std::sqrt(Scalar(1) + v2 * v2 / (Scalar(4) * v02 * v02));
  const Scalar tail = v2 / (Scalar(2) * v02);
  const Scalar inner = p.induced_sign == InducedSign::AsPrinted ? radical + tail : radical - tail;
  const Scalar induced = Scalar(p.kappa1) * std::sqrt(inner);
  const Scalar parasite = Scalar(p.kappa2) / Scalar(2) * v2 * v;
  return blade + induced + parasite;
}

/// Battery ledger for one UAV. Single writer: the episode loop that owns it.
class EnergyBudget {
 public:
  EnergyBudget() = default;
  EnergyBudget(double e_max, double step_duration);

  /// Charges step_duration * power and returns the step energy. A dead UAV
  /// is charged nothing. Crossing e_max marks the UAV dead.
  double step_energy(double power);

  double e_max() const { return e_max_; }
  double consumed() const { return consumed_; }
  double step_duration() const { return step_duration_; }
  bool alive() const { return alive_; }
  void reset();

 private:
  double e_max_ = 1'278'720.0;
  double consumed_ = 0.0;
  double step_duration_ = 1.0;
  bool alive_ = true;
};

/// Battery energy in joules for a capacity in mAh at a pack voltage.
inline double battery_energy_joules(double capacity_mah, double voltage) {
  return capacity_mah / 1000.0 * voltage * 3600.0;
}

double uav_ee(double throughput_bps, double step_energy_j);

/// Grand-total ratio of delivered rate to consumed energy. Both matrices are
/// steps x UAVs.
double system_ee(const Eigen::Ref<const Eigen::MatrixXd>& rates,
                 const Eigen::Ref<const Eigen::MatrixXd>& energies);

}  // namespace uavee
