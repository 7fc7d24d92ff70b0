#pragma once

#include "eivpd/ecf.hpp"

#include <Eigen/Dense>

#include <vector>

namespace eivpd {

//! Frequency weight w(u), normalized to integrate to one.
struct WeightSpec
{
  enum class Kind
  {
    uniform_symmetric, // 1 / (2 u_max) on [-u_max, u_max]
    trunc_gaussian     // N(0, sigma^2) truncated to [-u_max, u_max]
  };

  Kind kind = Kind::uniform_symmetric;
  double u_max = 1.0;
  double sigma = 0.5;
  //! Optional weight per residual pair (canonical order); empty = all ones.
  std::vector<double> per_pair_weights;

  //! Unnormalized density at u.
  double density(double u) const;
};

struct ObjectiveSpec
{
  WeightSpec weight;
  int grid_size = 41;        // odd, >= 5
  double denom_floor = 0.05; // nodes with |s0| below this are trimmed
};

//! Throws InvalidSpec when the spec is unusable (even/small grid, empty
//! weight support, floor outside (0, 0.5]).
void validate(const ObjectiveSpec& spec);

//! Composite Simpson discretization of w(u) du on nodes symmetric about 0.
struct QuadratureGrid
{
  std::vector<double> nodes;   // ascending, includes 0
  std::vector<double> weights; // nonnegative, sum to 1
  double denom_floor = 0.05;

  int size() const { return static_cast<int>(nodes.size()); }
  int center() const { return size() / 2; }
};

QuadratureGrid make_grid(const ObjectiveSpec& spec);

struct PairResidual
{
  VarPair pair;
  cplx value;
};

//! cov + pd_hat for every residual pair at s = (b u, -u). Throws
//! DenominatorUnderflow when |s0| < denom_floor.
std::vector<PairResidual> residuals_at(const Dataset& data,
                                       const Eigen::VectorXd& b,
                                       double u,
                                       double denom_floor = 0.05);

//! -sum_j w_j sum_p pw_p |r_p(u_j)|^2 over unmasked nodes, with node weights
//! renormalized over the unmasked set. residuals[j][p] belongs to node j.
double aggregate_objective(const QuadratureGrid& grid,
                           const std::vector<bool>& mask,
                           const std::vector<std::vector<cplx>>& residuals,
                           const std::vector<double>& pair_weights);

//! Outcome of one objective evaluation; never throws for trimming.
struct ObjectiveValue
{
  double value = 0.0;
  std::vector<bool> mask; // true where the node is used
  int n_masked = 0;
  bool degenerate = false; // > 50% of nodes trimmed
};

//! Binds a dataset and an objective spec; evaluates Q_N(b) repeatedly.
class Objective
{
public:
  Objective(const Dataset& data, ObjectiveSpec spec);

  //! Uses the evenness of the integrand: only u >= 0 nodes are evaluated.
  ObjectiveValue evaluate(const Eigen::VectorXd& b) const;
  //! Same quantity evaluated on every node; reference path for tests.
  ObjectiveValue evaluate_full_grid(const Eigen::VectorXd& b) const;

  //! Residual table on the full grid; rows with a trimmed node are NaN.
  std::vector<std::vector<cplx>> residual_table(const Eigen::VectorXd& b,
                                                std::vector<double>* denom_mag = nullptr) const;

  const QuadratureGrid& grid() const { return grid_; }
  const ObjectiveSpec& spec() const { return spec_; }
  const std::vector<VarPair>& pairs() const { return pairs_; }
  int k() const { return kernel_.k(); }

private:
  ObjectiveValue finish(std::vector<bool> mask,
                        const std::vector<std::vector<cplx>>& residuals) const;

  EcfKernel kernel_;
  ObjectiveSpec spec_;
  QuadratureGrid grid_;
  std::vector<VarPair> pairs_;
  std::vector<double> pair_weights_;
  Eigen::MatrixXd cov_;
};

//! Sample objective Q_N(b) <= 0. Throws GridDegenerate when more than half of
//! the nodes are trimmed.
double q_hat(const Dataset& data, const Eigen::VectorXd& b, const ObjectiveSpec& spec);

struct ProfilePoint
{
  double delta;
  double q_hat;
  bool degenerate;
};

//! q_hat along b_base + delta e_axis. Degenerate points report -inf.
std::vector<ProfilePoint> profile_curve(const Dataset& data,
                                        const Eigen::VectorXd& b_base,
                                        int axis,
                                        const std::vector<double>& deltas,
                                        const ObjectiveSpec& spec);

} // namespace eivpd
