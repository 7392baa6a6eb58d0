#include "heartval/nn/params.hpp"

#include <cmath>

#include "heartval/error.hpp"
#include "heartval/rng.hpp"

namespace heartval::nn {

namespace {

void add_view(std::vector<TensorView>& out, const std::string& name, Mat& m) {
  out.push_back({name, {m.rows(), m.cols()}, m.data(), m.size()});
}

void add_view(std::vector<TensorView>& out, const std::string& name, Vec& v) {
  out.push_back({name, {v.size()}, v.data(), v.size()});
}

void fill_he_normal(Mat& m, double fan_in, uint64_t seed) {
  Rng rng(seed);
  const double sd = std::sqrt(2.0 / fan_in);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal(0.0, sd);
}

void fill_he_normal(Vec& v, double fan_in, uint64_t seed) {
  Rng rng(seed);
  const double sd = std::sqrt(2.0 / fan_in);
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal(0.0, sd);
}

}  // namespace

std::vector<TensorView> tensor_views(ModelParams& p) {
  std::vector<TensorView> out;
  for (size_t l = 0; l < p.conv.size(); ++l) {
    const std::string prefix = "conv" + std::to_string(l + 1);
    add_view(out, prefix + ".weight", p.conv[l].weight);
    add_view(out, prefix + ".bias", p.conv[l].bias);
  }
  add_view(out, "lstm.fwd.w_input", p.lstm_fwd.w_input);
  add_view(out, "lstm.fwd.w_recur", p.lstm_fwd.w_recur);
  add_view(out, "lstm.fwd.bias", p.lstm_fwd.bias);
  add_view(out, "lstm.bwd.w_input", p.lstm_bwd.w_input);
  add_view(out, "lstm.bwd.w_recur", p.lstm_bwd.w_recur);
  add_view(out, "lstm.bwd.bias", p.lstm_bwd.bias);
  add_view(out, "dense.weight", p.dense.weight);
  add_view(out, "dense.bias", p.dense.bias);
  return out;
}

Index parameter_count(const ModelParams& params) {
  Index n = 0;
  auto views = tensor_views(const_cast<ModelParams&>(params));
  for (const auto& v : views) n += v.size;
  return n;
}

ModelParams zeros_like(const ModelParams& like) {
  ModelParams out;
  out.conv.reserve(like.conv.size());
  for (const auto& c : like.conv) {
    ConvLayerParams z;
    z.weight = Mat::Zero(c.weight.rows(), c.weight.cols());
    z.bias = Vec::Zero(c.bias.size());
    z.in_channels = c.in_channels;
    z.window = c.window;
    out.conv.push_back(std::move(z));
  }
  auto zero_dir = [](const LstmDirParams& d) {
    LstmDirParams z;
    z.w_input = Mat::Zero(d.w_input.rows(), d.w_input.cols());
    z.w_recur = Mat::Zero(d.w_recur.rows(), d.w_recur.cols());
    z.bias = Vec::Zero(d.bias.size());
    return z;
  };
  out.lstm_fwd = zero_dir(like.lstm_fwd);
  out.lstm_bwd = zero_dir(like.lstm_bwd);
  out.dense.weight = Vec::Zero(like.dense.weight.size());
  out.dense.bias = Vec::Zero(like.dense.bias.size());
  return out;
}

bool same_shape(const ModelParams& a, const ModelParams& b) {
  if (a.conv.size() != b.conv.size()) return false;
  for (size_t l = 0; l < a.conv.size(); ++l) {
    if (a.conv[l].weight.rows() != b.conv[l].weight.rows() ||
        a.conv[l].weight.cols() != b.conv[l].weight.cols() ||
        a.conv[l].bias.size() != b.conv[l].bias.size())
      return false;
  }
  auto dir_same = [](const LstmDirParams& x, const LstmDirParams& y) {
    return x.w_input.rows() == y.w_input.rows() && x.w_input.cols() == y.w_input.cols() &&
           x.w_recur.rows() == y.w_recur.rows() && x.w_recur.cols() == y.w_recur.cols() &&
           x.bias.size() == y.bias.size();
  };
  return dir_same(a.lstm_fwd, b.lstm_fwd) && dir_same(a.lstm_bwd, b.lstm_bwd) &&
         a.dense.weight.size() == b.dense.weight.size() &&
         a.dense.bias.size() == b.dense.bias.size();
}

void axpy(ModelParams& y, const ModelParams& x, double scale) {
  if (!same_shape(y, x)) throw Error(Errc::shape_mismatch, "parameter shapes disagree");
  auto vy = tensor_views(y);
  auto vx = tensor_views(const_cast<ModelParams&>(x));
  for (size_t i = 0; i < vy.size(); ++i)
    for (Index k = 0; k < vy[i].size; ++k) vy[i].data[k] += scale * vx[i].data[k];
}

ModelParams make_params(const ModelConfig& config) {
  validate(config);
  ModelParams p;
  const int filters = config.conv_filters;
  int in_channels = 1;
  for (size_t l = 0; l < config.conv_windows.size(); ++l) {
    ConvLayerParams layer;
    layer.in_channels = in_channels;
    layer.window = config.conv_windows[l];
    layer.weight = Mat::Zero(filters, static_cast<Index>(in_channels) * layer.window);
    layer.bias = Vec::Zero(filters);
    p.conv.push_back(std::move(layer));
    in_channels = filters;
  }

  const int hidden = config.lstm_hidden_units;
  const int features = 1;  // the model reads a single z-scored channel
  for (auto* dir : {&p.lstm_fwd, &p.lstm_bwd}) {
    dir->w_input = Mat::Zero(4 * hidden, features);
    dir->w_recur = Mat::Zero(4 * hidden, hidden);
    dir->bias = Vec::Zero(4 * hidden);
  }

  p.dense.weight = Vec::Zero(config.concat_width());
  p.dense.bias = Vec::Zero(1);
  return p;
}

ModelParams he_normal_init(const ModelConfig& config, uint64_t seed) {
  ModelParams p = make_params(config);
  for (size_t l = 0; l < p.conv.size(); ++l) {
    auto& layer = p.conv[l];
    const std::string prefix = "conv" + std::to_string(l + 1);
    fill_he_normal(layer.weight, static_cast<double>(layer.weight.cols()),
                   derive_seed(seed, prefix + ".weight"));
  }
  auto fill_dir = [&](LstmDirParams& d, const char* tag) {
    fill_he_normal(d.w_input, static_cast<double>(d.w_input.cols()),
                   derive_seed(seed, std::string("lstm.") + tag + ".w_input"));
    fill_he_normal(d.w_recur, static_cast<double>(d.w_recur.cols()),
                   derive_seed(seed, std::string("lstm.") + tag + ".w_recur"));
  };
  fill_dir(p.lstm_fwd, "fwd");
  fill_dir(p.lstm_bwd, "bwd");
  fill_he_normal(p.dense.weight, static_cast<double>(p.dense.weight.size()),
                 derive_seed(seed, "dense.weight"));
  return p;
}

ModelParams init_model_params(const ModelConfig& config, uint64_t seed) {
  ModelParams p = he_normal_init(config, seed);
  const int hidden = config.lstm_hidden_units;
  // Forget-gate bias starts at 1 so early cell state survives long sequences.
  p.lstm_fwd.bias.segment(hidden, hidden).setOnes();
  p.lstm_bwd.bias.segment(hidden, hidden).setOnes();
  return p;
}

}  // namespace heartval::nn
