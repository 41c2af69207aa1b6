#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace crowdnav::policy {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with a per-parameter learning rate vector (parameter groups).
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::VectorXd lr, AdamOptions opt = {});

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  const Eigen::VectorXd& lr() const { return lr_; }
  const Eigen::VectorXd& m() const { return m_; }
  const Eigen::VectorXd& v() const { return v_; }
  std::int64_t t() const { return t_; }
  void set_state(Eigen::VectorXd m, Eigen::VectorXd v, std::int64_t t);

 private:
  Eigen::VectorXd lr_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t t_ = 0;
  AdamOptions opt_;
};

}  // namespace crowdnav::policy
