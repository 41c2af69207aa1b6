#include "crowdnav/policy/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdnav::policy {

Adam::Adam(Eigen::VectorXd lr, AdamOptions opt)
    : lr_(std::move(lr)),
      m_(Eigen::VectorXd::Zero(lr_.size())),
      v_(Eigen::VectorXd::Zero(lr_.size())),
      opt_(opt) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != lr_.size() || grad.size() != lr_.size()) {
    throw std::invalid_argument("Adam::step size mismatch");
  }
  ++t_;
  m_ = opt_.beta1 * m_ + (1.0 - opt_.beta1) * grad;
  v_ = opt_.beta2 * v_ + (1.0 - opt_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  params.array() -= lr_.array() * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opt_.eps);
}

void Adam::set_state(Eigen::VectorXd m, Eigen::VectorXd v, std::int64_t t) {
  if (m.size() != lr_.size() || v.size() != lr_.size()) {
    throw std::invalid_argument("Adam::set_state size mismatch");
  }
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

}  // namespace crowdnav::policy
