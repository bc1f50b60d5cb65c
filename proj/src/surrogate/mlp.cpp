#include "gridsur/surrogate/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gridsur/surrogate/standardizer.hpp"
#include "gridsur/util.hpp"

namespace gridsur {

using nlohmann::json;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

MlpDivergence::MlpDivergence(int epoch)
    : FitError("training diverged (non-finite loss) in epoch " + std::to_string(epoch)),
      epoch_(epoch) {}

std::vector<Index> trunk_widths(Index inputs, Index outputs, int hidden_layers) {
  std::vector<Index> w;
  const double ratio = static_cast<double>(outputs) / static_cast<double>(inputs);
  for (int l = 1; l <= hidden_layers; ++l) {
    const double v = static_cast<double>(inputs) * std::pow(ratio, double(l) / (hidden_layers + 1));
    w.push_back(std::max<Index>(1, static_cast<Index>(std::llround(v))));
  }
  return w;
}

namespace {

void check_params(const MlpParams& hp) {
  if (hp.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (hp.hidden_layers < 0) throw std::invalid_argument("hidden_layers must be >= 0");
  if (hp.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(hp.dropout >= 0.0 && hp.dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
  if (hp.task_specific_layers < 0) throw std::invalid_argument("task_specific_layers must be >= 0");
  if (hp.head_width < 1) throw std::invalid_argument("head_width must be >= 1");
  if (!(hp.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
}

}  // namespace

MlpNetwork::MlpNetwork(Index inputs, Index outputs, const MlpParams& hp)
    : inputs_(inputs), outputs_(outputs), hp_(hp) {
  check_params(hp);
  if (inputs < 1 || outputs < 1) throw std::invalid_argument("network needs inputs and outputs");
  Index offset = 0;
  auto add = [&](Kind kind, Index in, Index out, Index blocks, bool hidden) {
    Index weights = 0;
    switch (kind) {
      case Kind::Dense: weights = in * out; break;
      case Kind::Block: weights = (in / blocks) * (out / blocks) * blocks; break;
      case Kind::BlockOut: weights = in; break;
    }
    layers_.push_back({kind, in, out, blocks, offset, offset + weights, hidden});
    offset += weights + out;
  };
  Index width = inputs;
  for (Index w : trunk_widths(inputs, outputs, hp.hidden_layers)) {
    add(Kind::Dense, width, w, 1, true);
    width = w;
  }
  if (hp.task_specific_layers == 0) {
    add(Kind::Dense, width, outputs, 1, false);
  } else {
    const Index h = hp.head_width;
    add(Kind::Dense, width, outputs * h, 1, true);
    for (int l = 1; l < hp.task_specific_layers; ++l)
      add(Kind::Block, outputs * h, outputs * h, outputs, true);
    add(Kind::BlockOut, outputs * h, outputs, outputs, false);
  }
  params_ = Vector::Zero(offset);
}

void MlpNetwork::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  params_.setZero();
  for (const auto& l : layers_) {
    Index fan_in = l.in, fan_out = l.out, count = l.b_offset - l.w_offset;
    if (l.kind != Kind::Dense) {
      fan_in = l.in / l.blocks;
      fan_out = l.out / l.blocks;
    }
    const double limit = hp_.activation == Activation::Relu && l.hidden
                             ? std::sqrt(6.0 / static_cast<double>(fan_in))
                             : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Index i = 0; i < count; ++i) params_[l.w_offset + i] = u(rng);
  }
}

Matrix MlpNetwork::apply(const Layer& l, const Matrix& a) const {
  const double* p = params_.data();
  const Eigen::Map<const Vector> b(p + l.b_offset, l.out);
  Matrix z(a.rows(), l.out);
  switch (l.kind) {
    case Kind::Dense:
      z.noalias() = a * ConstRowMap(p + l.w_offset, l.out, l.in).transpose();
      break;
    case Kind::Block: {
      const Index hi = l.in / l.blocks, ho = l.out / l.blocks;
      for (Index j = 0; j < l.blocks; ++j)
        z.middleCols(j * ho, ho).noalias() =
            a.middleCols(j * hi, hi) * ConstRowMap(p + l.w_offset + j * hi * ho, ho, hi).transpose();
      break;
    }
    case Kind::BlockOut: {
      const Index h = l.in / l.blocks;
      for (Index j = 0; j < l.blocks; ++j)
        z.col(j).noalias() = a.middleCols(j * h, h) * Eigen::Map<const Vector>(p + l.w_offset + j * h, h);
      break;
    }
  }
  z.rowwise() += b.transpose();
  return z;
}

void MlpNetwork::activate(Matrix& z) const {
  switch (hp_.activation) {
    case Activation::Relu: z = z.cwiseMax(0.0); break;
    case Activation::Tanh: z = z.array().tanh(); break;
    case Activation::Sigmoid: z = (1.0 + (-z.array()).exp()).inverse(); break;
  }
}

Matrix MlpNetwork::forward(const Matrix& x) const {
  if (x.cols() != inputs_) throw std::invalid_argument("network input width mismatch");
  Matrix a = x;
  for (const auto& l : layers_) {
    a = apply(l, a);
    if (l.hidden) activate(a);
  }
  return a;
}

double MlpNetwork::loss_and_gradient(const Matrix& x, const Matrix& y, Vector& grad,
                                     std::mt19937_64* rng) const {
  if (x.cols() != inputs_ || y.cols() != outputs_ || x.rows() != y.rows() || x.rows() == 0)
    throw std::invalid_argument("batch shape mismatch");
  const bool drop = rng != nullptr && hp_.dropout > 0.0;
  const double keep = 1.0 - hp_.dropout;

  // acts[i] is the (pre-dropout) input of layer i; acts.back() the output.
  std::vector<Matrix> acts{x};
  std::vector<Matrix> masks(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = i > 0 && drop && layers_[i - 1].hidden
                   ? apply(layers_[i], acts.back().cwiseProduct(masks[i - 1]))
                   : apply(layers_[i], acts.back());
    if (layers_[i].hidden) {
      activate(z);
      if (drop) {
        std::bernoulli_distribution bern(keep);
        masks[i].resize(z.rows(), z.cols());
        for (Index c = 0; c < z.cols(); ++c)
          for (Index r = 0; r < z.rows(); ++r) masks[i](r, c) = bern(*rng) ? 1.0 / keep : 0.0;
      }
    }
    acts.push_back(std::move(z));
  }

  const double count = static_cast<double>(y.rows() * y.cols());
  Matrix delta = acts.back() - y;
  const double loss = delta.squaredNorm() / count;
  delta *= 2.0 / count;

  grad.setZero(params_.size());
  const double* p = params_.data();
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& l = layers_[i];
    Matrix a = acts[i];  // input, after dropout of the previous layer
    if (i > 0 && drop && layers_[i - 1].hidden) a = a.cwiseProduct(masks[i - 1]);
    Eigen::Map<Vector>(grad.data() + l.b_offset, l.out) = delta.colwise().sum().transpose();
    Matrix da(a.rows(), l.in);
    switch (l.kind) {
      case Kind::Dense: {
        RowMap(grad.data() + l.w_offset, l.out, l.in).noalias() = delta.transpose() * a;
        if (i > 0) da.noalias() = delta * ConstRowMap(p + l.w_offset, l.out, l.in);
        break;
      }
      case Kind::Block: {
        const Index hi = l.in / l.blocks, ho = l.out / l.blocks;
        for (Index j = 0; j < l.blocks; ++j) {
          const Index off = l.w_offset + j * hi * ho;
          RowMap(grad.data() + off, ho, hi).noalias() =
              delta.middleCols(j * ho, ho).transpose() * a.middleCols(j * hi, hi);
          da.middleCols(j * hi, hi).noalias() = delta.middleCols(j * ho, ho) * ConstRowMap(p + off, ho, hi);
        }
        break;
      }
      case Kind::BlockOut: {
        const Index h = l.in / l.blocks;
        for (Index j = 0; j < l.blocks; ++j) {
          const Index off = l.w_offset + j * h;
          Eigen::Map<Vector>(grad.data() + off, h).noalias() = a.middleCols(j * h, h).transpose() * delta.col(j);
          da.middleCols(j * h, h).noalias() = delta.col(j) * Eigen::Map<const Vector>(p + off, h).transpose();
        }
        break;
      }
    }
    if (i == 0) break;
    // Back through dropout and the activation of layer i-1.
    const Matrix& h = acts[i];
    if (drop) da = da.cwiseProduct(masks[i - 1]);
    switch (hp_.activation) {
      case Activation::Relu: da = (h.array() > 0.0).select(da, 0.0); break;
      case Activation::Tanh: da = da.array() * (1.0 - h.array().square()); break;
      case Activation::Sigmoid: da = da.array() * h.array() * (1.0 - h.array()); break;
    }
    delta = std::move(da);
  }
  return loss;
}

namespace {

class MlpModel final : public SurrogateModel {
 public:
  MlpModel(MlpParams hp, Standardizer sx, Standardizer sy, MlpNetwork net)
      : SurrogateModel(net.inputs(), net.outputs()),
        hp_(hp),
        sx_(std::move(sx)),
        sy_(std::move(sy)),
        net_(std::move(net)) {}

  Family family() const override { return Family::Mlp; }
  HyperParams hyper_params() const override { return hp_; }

  void predict_row(std::span<const double> x, std::span<double> out) const override {
    check_row(x, out);
    Matrix z(1, input_dim());
    sx_.transform_row(x, {z.data(), static_cast<std::size_t>(input_dim())});
    const Matrix y = sy_.inverse(net_.forward(z));
    for (Index j = 0; j < output_dim(); ++j) out[j] = y(0, j);
  }

  json parameters_json() const override {
    const Vector& p = net_.parameters();
    return {{"input_standardizer", sx_.to_json()},
            {"target_standardizer", sy_.to_json()},
            {"weights", std::vector<double>(p.data(), p.data() + p.size())}};
  }

 protected:
  Matrix predict_batch(const Matrix& x) const override {
    return sy_.inverse(net_.forward(sx_.transform(x)));
  }

 private:
  MlpParams hp_;
  Standardizer sx_, sy_;
  MlpNetwork net_;
};

}  // namespace

SurrogatePtr fit_mlp(const Matrix& x, const Matrix& y, const MlpParams& hp, std::uint64_t seed) {
  if (x.rows() != y.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (x.rows() == 0 || y.cols() == 0) throw std::invalid_argument("empty training data");
  check_params(hp);
  Standardizer sx = Standardizer::fit(x);
  Standardizer sy = Standardizer::fit(y);
  const Matrix xs = sx.transform(x);
  const Matrix ys = sy.transform(y);

  MlpNetwork net(x.cols(), y.cols(), hp);
  net.initialize(derive_seed(seed, "init"));
  std::mt19937_64 rng(derive_seed(seed, "train"));

  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Vector& w = net.parameters();
  Vector m1 = Vector::Zero(w.size()), m2 = Vector::Zero(w.size()), g(w.size());
  std::vector<Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto n = static_cast<Index>(order.size());
  Matrix bx, by;
  long step = 0;
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    // Cosine decay of the step size down to 1% over the run.
    const double progress = hp.epochs > 1 ? double(epoch - 1) / (hp.epochs - 1) : 1.0;
    const double rate = hp.learning_rate * (0.01 + 0.99 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
    for (Index start = 0; start < n; start += hp.batch_size) {
      const Index b = std::min<Index>(hp.batch_size, n - start);
      bx.resize(b, xs.cols());
      by.resize(b, ys.cols());
      for (Index r = 0; r < b; ++r) {
        bx.row(r) = xs.row(order[static_cast<std::size_t>(start + r)]);
        by.row(r) = ys.row(order[static_cast<std::size_t>(start + r)]);
      }
      const double loss = net.loss_and_gradient(bx, by, g, &rng);
      if (!std::isfinite(loss) || !g.allFinite()) throw MlpDivergence(epoch);
      epoch_loss += loss * static_cast<double>(b);
      ++step;
      m1 = beta1 * m1 + (1.0 - beta1) * g;
      m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseAbs2();
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      w.array() -= rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
    }
    if (!std::isfinite(epoch_loss) || !w.allFinite()) throw MlpDivergence(epoch);
  }
  return std::make_unique<MlpModel>(hp, std::move(sx), std::move(sy), std::move(net));
}

SurrogatePtr mlp_from_json(const MlpParams& hp, const json& p) {
  Standardizer sx = Standardizer::from_json(p.at("input_standardizer"));
  Standardizer sy = Standardizer::from_json(p.at("target_standardizer"));
  MlpNetwork net(sx.dim(), sy.dim(), hp);
  const auto w = p.at("weights").get<std::vector<double>>();
  if (static_cast<Index>(w.size()) != net.parameters().size())
    throw std::invalid_argument("weight count does not match the architecture");
  net.parameters() = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  return std::make_unique<MlpModel>(hp, std::move(sx), std::move(sy), std::move(net));
}

}  // namespace gridsur
