#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "heartval/error.hpp"
#include "heartval/nn/model.hpp"
#include "heartval/rng.hpp"

using namespace heartval;
using namespace heartval::nn;

namespace {

ModelConfig tiny_config() {
  ModelConfig config;
  config.conv_windows = {3, 2};
  config.conv_filters = 2;
  config.conv_dropout_rate = 0.5;
  config.lstm_hidden_units = 3;
  config.lstm_dropout_rate = 0.8;
  config.input_length = 6;
  return config;
}

Vec random_input(Index n, Rng& rng) {
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal(0, 1);
  return x;
}

// Fully random parameters, biases included. Zero biases would park ReLU
// pre-activations exactly on the kink (zero receptive fields occur whenever
// dropout or clipping zeroes a patch), where finite differences are invalid.
ModelParams random_params(const ModelConfig& config, Rng& rng) {
  ModelParams params = make_params(config);
  for (auto& view : tensor_views(params))
    for (Index i = 0; i < view.size; ++i) view.data[i] = rng.normal(0, 0.4);
  return params;
}

// Central finite differences against the analytic gradient over every
// parameter entry.
void check_gradients(const ModelConfig& config, bool dropout_on, uint64_t seed) {
  Rng rng(seed + 1);
  ModelParams params = random_params(config, rng);
  const Vec x = random_input(config.input_length, rng);

  ModelCache cache;
  (void)model_forward(x, params, config, dropout_on, seed, &cache);
  const ModelParams analytic = model_backward(cache, params, config, 1.0);

  auto views = tensor_views(params);
  ModelParams analytic_copy = analytic;
  auto grad_views = tensor_views(analytic_copy);
  REQUIRE(views.size() == grad_views.size());

  const double h = 1e-5;
  for (size_t t = 0; t < views.size(); ++t) {
    for (Index i = 0; i < views[t].size; ++i) {
      double& w = views[t].data[i];
      const double saved = w;
      w = saved + h;
      const double up = model_forward(x, params, config, dropout_on, seed, nullptr);
      w = saved - h;
      const double down = model_forward(x, params, config, dropout_on, seed, nullptr);
      w = saved;
      const double fd = (up - down) / (2.0 * h);
      const double got = grad_views[t].data[i];
      const double denom = std::max(std::abs(fd), std::abs(got));
      const double rel = denom > 0.0 ? std::abs(fd - got) / denom : 0.0;
      const double tol = denom < 1e-6 ? 1e-2 : 1e-4;
      if (rel >= tol)
        FAIL_CHECK("gradient mismatch at " << views[t].name << "[" << i << "]: analytic " << got
                                           << " vs fd " << fd);
    }
  }
}

}  // namespace

TEST_CASE("analytic gradients match finite differences, dropout off") {
  check_gradients(tiny_config(), false, 12);
}

TEST_CASE("analytic gradients match finite differences, dropout on") {
  check_gradients(tiny_config(), true, 13);
}

TEST_CASE("analytic gradients match on a single-layer even-window config") {
  auto config = tiny_config();
  config.conv_windows = {4};
  config.lstm_hidden_units = 2;
  check_gradients(config, false, 14);
}

TEST_CASE("zero upstream gradient zeroes every parameter gradient") {
  const auto config = tiny_config();
  const auto params = init_model_params(config, 3);
  Rng rng(4);
  const Vec x = random_input(config.input_length, rng);
  ModelCache cache;
  (void)model_forward(x, params, config, true, 3, &cache);
  ModelParams grads = model_backward(cache, params, config, 0.0);
  for (const auto& view : tensor_views(grads))
    for (Index i = 0; i < view.size; ++i) CHECK(view.data[i] == 0.0);
}

TEST_CASE("dense bias gradient equals the upstream gradient") {
  const auto config = tiny_config();
  const auto params = init_model_params(config, 5);
  Rng rng(6);
  const Vec x = random_input(config.input_length, rng);
  ModelCache cache;
  (void)model_forward(x, params, config, false, 0, &cache);
  const auto grads = model_backward(cache, params, config, 2.5);
  REQUIRE(grads.dense.bias.size() == 1);
  CHECK(grads.dense.bias[0] == 2.5);
}

TEST_CASE("model_forward is deterministic with dropout off") {
  const auto config = tiny_config();
  const auto params = init_model_params(config, 8);
  Rng rng(9);
  const Vec x = random_input(config.input_length, rng);
  const double a = model_forward(x, params, config, false, 1);
  const double b = model_forward(x, params, config, false, 999);
  CHECK(a == b);
}

TEST_CASE("all-zero parameters output the dense bias") {
  const auto config = tiny_config();
  auto params = make_params(config);
  params.dense.bias[0] = 0.37;
  Rng rng(10);
  const Vec x = random_input(config.input_length, rng);
  CHECK(model_forward(x, params, config, false, 0) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("dropout passes are reproducible per seed") {
  const auto config = tiny_config();
  const auto params = init_model_params(config, 11);
  Rng rng(12);
  const Vec x = random_input(config.input_length, rng);
  const double a = model_forward(x, params, config, true, 42);
  const double b = model_forward(x, params, config, true, 42);
  CHECK(a == b);
  bool any_different = false;
  for (uint64_t s = 0; s < 8 && !any_different; ++s)
    any_different = model_forward(x, params, config, true, 100 + s) != a;
  CHECK(any_different);
}

TEST_CASE("zero dropout rates make dropout_on a no-op") {
  auto config = tiny_config();
  config.conv_dropout_rate = 0.0;
  config.lstm_dropout_rate = 0.0;
  const auto params = init_model_params(config, 13);
  Rng rng(14);
  const Vec x = random_input(config.input_length, rng);
  CHECK(model_forward(x, params, config, true, 7) == model_forward(x, params, config, false, 7));
}

TEST_CASE("model_forward rejects inputs of the wrong length") {
  const auto config = tiny_config();
  const auto params = init_model_params(config, 15);
  bool threw = false;
  try {
    (void)model_forward(Vec::Zero(config.input_length + 1), params, config, false, 0);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == Errc::shape_mismatch);
  }
  CHECK(threw);
}

TEST_CASE("model_backward rejects a cache from different shapes") {
  const auto config = tiny_config();
  const auto params = init_model_params(config, 16);
  Rng rng(17);
  const Vec x = random_input(config.input_length, rng);
  ModelCache cache;
  (void)model_forward(x, params, config, false, 0, &cache);

  auto wider = tiny_config();
  wider.conv_filters = 3;
  const auto other = init_model_params(wider, 16);
  bool threw = false;
  try {
    (void)model_backward(cache, other, wider, 1.0);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == Errc::stale_cache);
  }
  CHECK(threw);
}
