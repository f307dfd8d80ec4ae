//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "qfipmp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

namespace qfipmp {

namespace {

bool all_finite(const Operator& m) { return m.allFinite(); }

void check_finite(const Operator& a, const Operator& b, double t) {
  if (!all_finite(a) || !all_finite(b)) {
    throw NumericalError("non-finite values during propagation at t = " + std::to_string(t) +
                         " (step too large?)");
  }
}

int steps_for(double duration, double max_step) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(duration) / max_step - 1e-9)));
}

}  // namespace

Model::Model(ModelSpec spec)
    : spec_(spec), spins_(spec.n_spins), dissipator_(spec.channel, spec.n_spins) {
  drift_ = spec_.chi * spins_.jz * spins_.jz + spec_.omega * spins_.jz;
}

Operator Model::hamiltonian(double u) const { return drift_ + u * spins_.jx; }

Model Model::with_costate_channel_sign(double sign) const {
  Model copy = *this;
  copy.costate_channel_sign_ = sign;
  return copy;
}

void ControlProtocol::validate() const {
  if (values.empty()) throw std::invalid_argument("control grid must have at least one segment");
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("evolution time T must be positive");
  }
  if (!(u_max >= 0.0)) throw std::invalid_argument("u_max must be >= 0");
  for (double u : values) {
    if (!std::isfinite(u)) throw std::invalid_argument("control values must be finite");
    if (u_max > 0.0 && std::abs(u) > u_max * (1.0 + 1e-12)) {
      throw std::invalid_argument("control amplitude exceeds u_max");
    }
  }
}

ControlProtocol ControlProtocol::constant(double duration, int segments, double value,
                                          double u_max) {
  if (segments < 1) throw std::invalid_argument("control grid must have at least one segment");
  return ControlProtocol{duration, std::vector<double>(static_cast<std::size_t>(segments), value),
                         u_max};
}

Operator coherent_x_state(int n_spins) {
  const Operator jx = collective_spin(n_spins, Axis::X);
  const HermitianEigen eig = hermitian_eig(jx);
  Eigen::VectorXcd psi = eig.vectors.col(eig.vectors.cols() - 1);
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    if (std::abs(psi(k)) > 1e-12) {
      psi *= std::conj(psi(k)) / std::abs(psi(k));
      break;
    }
  }
  psi.normalize();
  return psi * psi.adjoint();
}

Operator hl_state_density(int n_spins) {
  const Eigen::Index dim = SpinOperators(n_spins).dim;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(dim - 1) = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

int default_substeps(double duration, int segments) {
  if (segments < 1 || !(duration > 0.0)) {
    throw std::invalid_argument("default_substeps needs T > 0 and M >= 1");
  }
  const double segment = duration / segments;
  const double dt = std::min(1e-3, segment / 4.0);
  int steps = steps_for(segment, dt);
  if (steps % 2 != 0) ++steps;
  return steps;
}

AugmentedState state_velocity(const Model& model, double u, const AugmentedState& x) {
  const Operator h = model.hamiltonian(u);
  AugmentedState v;
  v.rho = -kI * commutator(h, x.rho) + model.dissipator().apply(x.rho);
  v.rho_omega = -kI * commutator(h, x.rho_omega) -
                kI * commutator(model.parameter_generator(), x.rho) +
                model.dissipator().apply(x.rho_omega);
  return v;
}

CostatePair costate_velocity(const Model& model, double u, const CostatePair& c) {
  const Operator h = model.hamiltonian(u);
  const double sign = model.costate_channel_sign();
  CostatePair v;
  v.lambda = -kI * commutator(h, c.lambda) -
             kI * commutator(model.parameter_generator(), c.lambda_omega) +
             sign * model.dissipator().apply(c.lambda);
  v.lambda_omega = -kI * commutator(h, c.lambda_omega) + sign * model.dissipator().apply(c.lambda_omega);
  return v;
}

namespace detail {

class StepKernel {
 public:
  virtual ~StepKernel() = default;
  virtual void set_control(double u) = 0;
  virtual void advance_state(Operator& rho, Operator& rho_omega, double h) = 0;
  virtual void advance_costate(Operator& lambda, Operator& lambda_omega, double h) = 0;
};

namespace {

// RK4 kernel on D x D matrices; D = Eigen::Dynamic for larger systems.
template <int D>
class RK4Kernel final : public StepKernel {
  using Mat = Eigen::Matrix<Complex, D, D>;

 public:
  explicit RK4Kernel(const Model& model)
      : drift_(model.drift()),
        jx_(model.control_operator()),
        jz_(model.parameter_generator()),
        half_sq_(model.dissipator().half_jump_square_sum()),
        rate_(model.dissipator().rate()),
        costate_sign_(model.costate_channel_sign()) {
    for (const Operator& jump : model.dissipator().jumps()) jumps_.emplace_back(jump);
    dissipative_ = !jumps_.empty();
    const Eigen::Index d = model.dim();
    detect_structure(d);
    a_.resize(d, d);
    b_.resize(d, d);
    stage_a_.resize(d, d);
    stage_b_.resize(d, d);
    tmp_.resize(d, d);
    for (int s = 0; s < 4; ++s) {
      ka_[s].resize(d, d);
      kb_[s].resize(d, d);
    }
    set_control(0.0);
  }

  void set_control(double u) override {
    u_ = u;
    h_ = drift_ + u * jx_;
  }

  void advance_state(Operator& rho, Operator& rho_omega, double h) override {
    step(rho, rho_omega, h, false);
  }
  void advance_costate(Operator& lambda, Operator& lambda_omega, double h) override {
    step(lambda, lambda_omega, h, true);
  }

 private:
  // The twist-and-turn model has a diagonal drift and generator, and Pauli
  // jumps are Hermitian monomial matrices with L^2 proportional to the
  // identity. When all of that holds the right-hand side needs only the two
  // products with Jx; everything else is elementwise.
  void detect_structure(Eigen::Index d) {
    auto is_diagonal = [](const Mat& m) {
      return (m - Mat(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    };
    structured_ = is_diagonal(drift_) && is_diagonal(jz_);
    if (dissipative_) {
      const Complex c = half_sq_(0, 0);
      structured_ = structured_ && c.imag() == 0.0 &&
                    (half_sq_ - c * Mat::Identity(d, d)).cwiseAbs().maxCoeff() == 0.0;
      half_sq_scalar_ = c.real();
    }
    for (const Mat& jump : jumps_) {
      Monomial m;
      m.perm.resize(static_cast<std::size_t>(d));
      m.weight.resize(d, d);
      Eigen::VectorXcd v(d);
      for (Eigen::Index i = 0; i < d && structured_; ++i) {
        Eigen::Index nonzero = 0;
        for (Eigen::Index j = 0; j < d; ++j) {
          if (jump(i, j) != 0.0) {
            ++nonzero;
            m.perm[static_cast<std::size_t>(i)] = j;
            v(i) = jump(i, j);
          }
        }
        structured_ = nonzero == 1;
      }
      if (!structured_) break;
      // (L X L)_ij = v_i X_{p(i) p(j)} conj(v_j) for Hermitian monomial L.
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) m.weight(i, j) = v(i) * std::conj(v(j));
      }
      monomials_.push_back(std::move(m));
    }
    if (!structured_) return;
    drift_diff_.resize(d, d);
    jz_diff_.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        drift_diff_(i, j) = drift_(i, i) - drift_(j, j);
        jz_diff_(i, j) = jz_(i, i) - jz_(j, j);
      }
    }
  }

  // out += scale * D(x)
  void dissipate(const Mat& x, double scale, Mat& out) {
    if (!dissipative_) return;
    const double s = scale * rate_;
    if (structured_) {
      const Eigen::Index d = x.rows();
      for (const Monomial& m : monomials_) {
        for (Eigen::Index j = 0; j < d; ++j) {
          const Eigen::Index pj = m.perm[static_cast<std::size_t>(j)];
          for (Eigen::Index i = 0; i < d; ++i) {
            out(i, j) += s * m.weight(i, j) * x(m.perm[static_cast<std::size_t>(i)], pj);
          }
        }
      }
      out -= (2.0 * s * half_sq_scalar_) * x;
      return;
    }
    for (const Mat& jump : jumps_) {
      tmp_.noalias() = jump * x;
      out.noalias() += s * tmp_ * jump;
    }
    out.noalias() -= s * half_sq_ * x;
    out.noalias() -= s * x * half_sq_;
  }

  // State: d(rho) = -i[H, rho] + D(rho), d(rho_w) = -i[H, rho_w] - i[Jz, rho] + D(rho_w).
  // Costate: d(l) = -i[H, l] - i[Jz, l_w] + s D(l), d(l_w) = -i[H, l_w] + s D(l_w).
  void rhs(const Mat& a, const Mat& b, Mat& da, Mat& db, bool costate) {
    if (structured_) {
      da.noalias() = jx_ * a;
      da.noalias() -= a * jx_;
      da *= u_;
      da += drift_diff_.cwiseProduct(a);
      db.noalias() = jx_ * b;
      db.noalias() -= b * jx_;
      db *= u_;
      db += drift_diff_.cwiseProduct(b);
      if (costate) {
        da += jz_diff_.cwiseProduct(b);
      } else {
        db += jz_diff_.cwiseProduct(a);
      }
      da *= -kI;
      db *= -kI;
      const double scale = costate ? costate_sign_ : 1.0;
      dissipate(a, scale, da);
      dissipate(b, scale, db);
      return;
    }
    da.noalias() = h_ * a;
    da.noalias() -= a * h_;
    db.noalias() = h_ * b;
    db.noalias() -= b * h_;
    if (costate) {
      da.noalias() += jz_ * b;
      da.noalias() -= b * jz_;
    } else {
      db.noalias() += jz_ * a;
      db.noalias() -= a * jz_;
    }
    da *= -kI;
    db *= -kI;
    const double scale = costate ? costate_sign_ : 1.0;
    dissipate(a, scale, da);
    dissipate(b, scale, db);
  }

  void step(Operator& x, Operator& y, double h, bool costate) {
    a_ = x;
    b_ = y;
    rhs(a_, b_, ka_[0], kb_[0], costate);
    stage_a_ = a_ + (0.5 * h) * ka_[0];
    stage_b_ = b_ + (0.5 * h) * kb_[0];
    rhs(stage_a_, stage_b_, ka_[1], kb_[1], costate);
    stage_a_ = a_ + (0.5 * h) * ka_[1];
    stage_b_ = b_ + (0.5 * h) * kb_[1];
    rhs(stage_a_, stage_b_, ka_[2], kb_[2], costate);
    stage_a_ = a_ + h * ka_[2];
    stage_b_ = b_ + h * kb_[2];
    rhs(stage_a_, stage_b_, ka_[3], kb_[3], costate);
    a_ += (h / 6.0) * (ka_[0] + 2.0 * ka_[1] + 2.0 * ka_[2] + ka_[3]);
    b_ += (h / 6.0) * (kb_[0] + 2.0 * kb_[1] + 2.0 * kb_[2] + kb_[3]);
    x = a_;
    y = b_;
  }

  struct Monomial {
    std::vector<Eigen::Index> perm;
    Mat weight;
  };

  Mat drift_, jx_, jz_, half_sq_, h_;
  std::vector<Mat> jumps_;
  double u_ = 0.0;
  bool structured_ = false;
  std::vector<Monomial> monomials_;
  double half_sq_scalar_ = 0.0;
  Mat drift_diff_, jz_diff_;
  double rate_;
  double costate_sign_;
  bool dissipative_ = false;
  Mat a_, b_, stage_a_, stage_b_, tmp_;
  Mat ka_[4], kb_[4];
};

std::unique_ptr<StepKernel> make_kernel(const Model& model) {
  switch (model.dim()) {
    case 2:
      return std::make_unique<RK4Kernel<2>>(model);
    case 4:
      return std::make_unique<RK4Kernel<4>>(model);
    case 8:
      return std::make_unique<RK4Kernel<8>>(model);
    default:
      return std::make_unique<RK4Kernel<Eigen::Dynamic>>(model);
  }
}

}  // namespace
}  // namespace detail

Stepper::Stepper(const Model& model) : kernel_(detail::make_kernel(model)) {}
Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

void Stepper::set_control(double u) {
  u_ = u;
  kernel_->set_control(u);
}

void Stepper::advance_state(AugmentedState& x, double h) {
  kernel_->advance_state(x.rho, x.rho_omega, h);
}

void Stepper::advance_costate(CostatePair& c, double h) {
  kernel_->advance_costate(c.lambda, c.lambda_omega, h);
}

AugmentedTrajectory propagate_forward(const Model& model, const ControlProtocol& control,
                                      const Operator& rho0, int substeps) {
  control.validate();
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (rho0.rows() != model.dim() || rho0.cols() != model.dim()) {
    throw std::invalid_argument("initial density matrix has the wrong dimension");
  }
  const int segments = control.segments();
  const double h = control.segment_length() / substeps;

  AugmentedTrajectory traj;
  traj.times.reserve(static_cast<std::size_t>(segments) + 1);
  traj.rho.reserve(static_cast<std::size_t>(segments) + 1);
  traj.rho_omega.reserve(static_cast<std::size_t>(segments) + 1);

  AugmentedState x{rho0, Operator::Zero(model.dim(), model.dim())};
  traj.times.push_back(0.0);
  traj.rho.push_back(x.rho);
  traj.rho_omega.push_back(x.rho_omega);

  Stepper stepper(model);
  for (int k = 0; k < segments; ++k) {
    stepper.set_control(control.values[static_cast<std::size_t>(k)]);
    for (int s = 0; s < substeps; ++s) stepper.advance_state(x, h);
    const double t = control.segment_start(k + 1);
    check_finite(x.rho, x.rho_omega, t);
    traj.times.push_back(t);
    traj.rho.push_back(x.rho);
    traj.rho_omega.push_back(x.rho_omega);
  }
  return traj;
}

CostateTrajectory propagate_costate_backward(const Model& model, const ControlProtocol& control,
                                             const CostatePair& terminal, int substeps) {
  control.validate();
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const Eigen::Index d = model.dim();
  if (terminal.lambda.rows() != d || terminal.lambda.cols() != d ||
      terminal.lambda_omega.rows() != d || terminal.lambda_omega.cols() != d) {
    throw std::invalid_argument("costate boundary has the wrong dimension");
  }
  const int segments = control.segments();
  const auto count = static_cast<std::size_t>(segments) + 1;
  const double h = control.segment_length() / substeps;

  CostateTrajectory traj;
  traj.times.resize(count);
  traj.lambda.resize(count);
  traj.lambda_omega.resize(count);

  CostatePair c = terminal;
  traj.times[count - 1] = control.duration;
  traj.lambda[count - 1] = c.lambda;
  traj.lambda_omega[count - 1] = c.lambda_omega;

  Stepper stepper(model);
  for (int k = segments - 1; k >= 0; --k) {
    stepper.set_control(control.values[static_cast<std::size_t>(k)]);
    for (int s = 0; s < substeps; ++s) stepper.advance_costate(c, -h);
    const double t = control.segment_start(k);
    check_finite(c.lambda, c.lambda_omega, t);
    const auto idx = static_cast<std::size_t>(k);
    traj.times[idx] = t;
    traj.lambda[idx] = c.lambda;
    traj.lambda_omega[idx] = c.lambda_omega;
  }
  return traj;
}

AugmentedState evolve_state(const Model& model, double u, AugmentedState x, double duration,
                            double max_step) {
  if (duration == 0.0) return x;
  const int n = steps_for(duration, max_step);
  const double h = duration / n;
  Stepper stepper(model);
  stepper.set_control(u);
  for (int s = 0; s < n; ++s) stepper.advance_state(x, h);
  return x;
}

CostatePair evolve_costate(const Model& model, double u, CostatePair c, double duration,
                           double max_step) {
  if (duration == 0.0) return c;
  const int n = steps_for(duration, max_step);
  const double h = duration / n;
  Stepper stepper(model);
  stepper.set_control(u);
  for (int s = 0; s < n; ++s) stepper.advance_costate(c, h);
  return c;
}

PositivityReport monitor_trajectory(const AugmentedTrajectory& trajectory) {
  PositivityReport report;
  report.min_eigenvalue = 1.0;
  for (std::size_t k = 0; k < trajectory.rho.size(); ++k) {
    const Operator& rho = trajectory.rho[k];
    const Operator& rho_omega = trajectory.rho_omega[k];
    report.max_trace_error = std::max(report.max_trace_error, std::abs(rho.trace() - 1.0));
    report.max_rho_omega_trace = std::max(report.max_rho_omega_trace, std::abs(rho_omega.trace()));
    report.max_hermitian_residual =
        std::max({report.max_hermitian_residual, hermitian_residual(rho), hermitian_residual(rho_omega)});
    const Operator herm = 0.5 * (rho + rho.adjoint());
    const Eigen::SelfAdjointEigenSolver<Operator> solver(herm, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = std::min(report.min_eigenvalue, solver.eigenvalues()(0));
  }
  if (report.min_eigenvalue < -1e-7) {
    report.warned = true;
    std::clog << "warning: density matrix eigenvalue " << report.min_eigenvalue
              << " below -1e-7; consider more substeps\n";
  }
  return report;
}

}  // namespace qfipmp
