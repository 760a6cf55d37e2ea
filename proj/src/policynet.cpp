#include "ltac/policynet.hpp"

#include <cmath>
#include <stdexcept>

namespace ltac {

namespace {

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutableMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using VecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMutableMap = Eigen::Map<Eigen::VectorXd>;

// Forward through one block; layers[l] holds the post-activation output of
// layer l (logits for the last layer, no activation there).
Eigen::VectorXd block_forward(const PolicyParams& p, int agent,
                              const Eigen::VectorXd& s,
                              std::vector<Eigen::VectorXd>* activations) {
  const std::vector<int> widths = p.layout.block_widths(agent);
  const int layers = static_cast<int>(widths.size()) - 1;
  int off = p.layout.block_offset(agent);
  Eigen::VectorXd x = s;
  for (int l = 0; l < layers; ++l) {
    const int rows = widths[l + 1];
    const int cols = widths[l];
    RowMajorMap w(p.flat.data() + off, rows, cols);
    off += rows * cols;
    VecMap bias(p.flat.data() + off, rows);
    off += rows;
    Eigen::VectorXd u = w * x + bias;
    if (l + 1 < layers)
      for (int i = 0; i < rows; ++i) u(i) = u(i) > 0.0 ? u(i) : 0.0;
    if (activations) activations->push_back(u);
    x = std::move(u);
  }
  return x;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

}  // namespace

std::vector<int> PolicyLayout::block_widths(int agent) const {
  std::vector<int> w;
  w.push_back(input_dim);
  for (int h : hidden) w.push_back(h);
  w.push_back(action_counts[agent]);
  return w;
}

PolicyLayout PolicyLayout::make(int n_agents, int input_dim,
                                std::vector<int> action_counts,
                                std::vector<int> hidden) {
  if (n_agents < 1 || input_dim < 1)
    throw std::invalid_argument("PolicyLayout: n_agents, input_dim >= 1");
  if (static_cast<int>(action_counts.size()) != n_agents)
    throw std::invalid_argument("PolicyLayout: action_counts length mismatch");
  for (int c : action_counts)
    if (c < 1) throw std::invalid_argument("PolicyLayout: action count >= 1");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("PolicyLayout: hidden width >= 1");
  PolicyLayout lay;
  lay.n_agents = n_agents;
  lay.input_dim = input_dim;
  lay.action_counts = std::move(action_counts);
  lay.hidden = std::move(hidden);
  lay.block_offsets_.assign(n_agents + 1, 0);
  for (int j = 0; j < n_agents; ++j) {
    const std::vector<int> widths = lay.block_widths(j);
    int count = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
      count += widths[l + 1] * widths[l] + widths[l + 1];
    lay.block_offsets_[j + 1] = lay.block_offsets_[j] + count;
  }
  lay.dim = lay.block_offsets_[n_agents];
  return lay;
}

PolicyParams make_policy(PolicyLayout layout) {
  PolicyParams p;
  p.flat = Eigen::VectorXd::Zero(layout.dim);
  p.layout = std::move(layout);
  return p;
}

void randomize_policy(PolicyParams& p, std::uint64_t seed, double stddev) {
  RngStream rng(seed);
  for (Eigen::Index i = 0; i < p.flat.size(); ++i)
    p.flat(i) = stddev * rng.normal();
}

PolicyParams init_policy(std::uint64_t seed, int n_agents, int input_dim,
                         const std::vector<int>& action_counts, int hidden,
                         double init_std) {
  if (hidden < 1) throw std::invalid_argument("init_policy: hidden >= 1");
  PolicyParams p = make_policy(
      PolicyLayout::make(n_agents, input_dim, action_counts, {hidden, hidden}));
  randomize_policy(p, seed, init_std);
  return p;
}

std::vector<Eigen::VectorXd> action_distribution(const PolicyParams& p,
                                                 const Eigen::VectorXd& s) {
  if (s.size() != p.layout.input_dim)
    throw std::invalid_argument("action_distribution: state dim mismatch");
  std::vector<Eigen::VectorXd> dists;
  dists.reserve(p.layout.n_agents);
  for (int j = 0; j < p.layout.n_agents; ++j)
    dists.push_back(softmax(block_forward(p, j, s, nullptr)));
  return dists;
}

JointAction sample_joint(const PolicyParams& p, const Eigen::VectorXd& s,
                         RngStream& rng) {
  JointAction a(p.layout.n_agents);
  for (int j = 0; j < p.layout.n_agents; ++j) {
    const Eigen::VectorXd pi = softmax(block_forward(p, j, s, nullptr));
    a[j] = rng.categorical({pi.data(), static_cast<std::size_t>(pi.size())});
  }
  return a;
}

JointAction argmax_joint(const PolicyParams& p, const Eigen::VectorXd& s) {
  JointAction a(p.layout.n_agents);
  for (int j = 0; j < p.layout.n_agents; ++j) {
    Eigen::Index best = 0;
    block_forward(p, j, s, nullptr).maxCoeff(&best);
    a[j] = static_cast<int>(best);
  }
  return a;
}

double log_prob(const PolicyParams& p, const Eigen::VectorXd& s,
                const JointAction& a) {
  if (static_cast<int>(a.size()) != p.layout.n_agents)
    throw std::invalid_argument("log_prob: action length mismatch");
  double lp = 0.0;
  for (int j = 0; j < p.layout.n_agents; ++j) {
    if (a[j] < 0 || a[j] >= p.layout.action_counts[j])
      throw std::invalid_argument("log_prob: action index out of range");
    const Eigen::VectorXd pi = softmax(block_forward(p, j, s, nullptr));
    lp += std::log(pi(a[j]));
  }
  return lp;
}

Eigen::VectorXd score(const PolicyParams& p, const Eigen::VectorXd& s,
                      const JointAction& a) {
  if (s.size() != p.layout.input_dim)
    throw std::invalid_argument("score: state dim mismatch");
  if (static_cast<int>(a.size()) != p.layout.n_agents)
    throw std::invalid_argument("score: action length mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p.layout.dim);

  for (int j = 0; j < p.layout.n_agents; ++j) {
    if (a[j] < 0 || a[j] >= p.layout.action_counts[j])
      throw std::invalid_argument("score: action index out of range");
    const std::vector<int> widths = p.layout.block_widths(j);
    const int layers = static_cast<int>(widths.size()) - 1;

    std::vector<Eigen::VectorXd> acts;  // post-activation per layer
    acts.reserve(layers);
    const Eigen::VectorXd logits = block_forward(p, j, s, &acts);
    const Eigen::VectorXd pi = softmax(logits);

    // d log pi(a_j) / d logits
    Eigen::VectorXd gu = -pi;
    gu(a[j]) += 1.0;

    // Walk layers top-down; layer l parameters start at w_off(l).
    std::vector<int> w_off(layers);
    int off = p.layout.block_offset(j);
    for (int l = 0; l < layers; ++l) {
      w_off[l] = off;
      off += widths[l + 1] * widths[l] + widths[l + 1];
    }
    for (int l = layers - 1; l >= 0; --l) {
      const int rows = widths[l + 1];
      const int cols = widths[l];
      const Eigen::VectorXd& input = (l == 0) ? s : acts[l - 1];
      RowMajorMutableMap gw(g.data() + w_off[l], rows, cols);
      gw.noalias() = gu * input.transpose();
      VecMutableMap gb(g.data() + w_off[l] + rows * cols, rows);
      gb = gu;
      if (l > 0) {
        RowMajorMap w(p.flat.data() + w_off[l], rows, cols);
        Eigen::VectorXd gx = w.transpose() * gu;
        // relu gate of the producing layer
        gu.resize(cols);
        for (int i = 0; i < cols; ++i)
          gu(i) = acts[l - 1](i) > 0.0 ? gx(i) : 0.0;
      }
    }
  }
  return g;
}

}  // namespace ltac
