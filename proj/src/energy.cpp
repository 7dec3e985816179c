#include "uavee/energy.hpp"

namespace uavee {

void PowerModelParams::validate() const {
  if (!(kappa0 > 0 && kappa1 > 0 && kappa2 > 0 && u_tip > 0 && v0 > 0))
    throw std::invalid_argument("power model: all coefficients must be > 0");
}

EnergyBudget::EnergyBudget(double e_max, double step_duration)
    : e_max_(e_max), step_duration_(step_duration) {
  if (!(e_max > 0)) throw std::invalid_argument("energy budget: e_max must be > 0");
  if (!(step_duration > 0)) throw std::invalid_argument("energy budget: step duration must be > 0");
}

double EnergyBudget::step_energy(double power) {
  if (power < 0) throw std::domain_error("step_energy: negative power");
  if (!alive_) return 0.0;
  const double e = step_duration_ * power;
  consumed_ += e;
  if (consumed_ > e_max_) alive_ = false;
  return e;
}

void EnergyBudget::reset() {
  consumed_ = 0.0;
  alive_ = true;
}

double uav_ee(double throughput_bps, double step_energy_j) {
  if (!(step_energy_j > 0)) throw std::domain_error("uav_ee: step energy must be > 0");
  return throughput_bps / step_energy_j;
}

double system_ee(const Eigen::Ref<const Eigen::MatrixXd>& rates,
                 const Eigen::Ref<const Eigen::MatrixXd>& energies) {
  if (rates.rows() != energies.rows() || rates.cols() != energies.cols())
    throw std::invalid_argument("system_ee: rate and energy logs differ in shape");
  const double total_energy = energies.sum();
  if (!(total_energy > 0)) throw std::domain_error("system_ee: total energy must be > 0");
  return rates.sum() / total_energy;
}

}  // namespace uavee
