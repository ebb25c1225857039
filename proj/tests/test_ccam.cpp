#include "doctest.h"

#include <cmath>
#include <sstream>

#include "symparam/ccam.hpp"
#include "symparam/errors.hpp"
#include "symparam/ops.hpp"

using namespace symparam;

namespace {

Tensor random_features(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  std::vector<double> v(h * w * c);
  for (auto& x : v) x = uniform01(rng) * 4 - 2;
  return Tensor({h, w, c}, v);
}

void fill(Tensor& t, double value) {
  for (auto& v : t.mutable_data()) v = value;
}

}  // namespace

TEST_CASE("layer shapes") {
  Rng init = make_stream(0, "init");
  CHECK(CcamLayer(8, 3, 4, init).bottleneck() == 2);
  CHECK(CcamLayer(10, 3, 4, init).bottleneck() == 3);
  CHECK(CcamLayer(2, 3, 4, init).bottleneck() == 1);
  CcamLayer layer(8, 3, 4, init);
  CHECK(layer.parameter("embed.weight").shape() == Shape{3, 8});
  CHECK(layer.parameter("squeeze.weight").shape() == Shape{16, 2});
  CHECK(layer.parameter("excite.weight").shape() == Shape{2, 8});
  CHECK_THROWS_AS(layer.parameter("nope"), UsageError);
}

TEST_CASE("zeroed excitation gives half gates") {
  Rng init = make_stream(1, "init");
  CcamLayer layer(6, 2, 4, init);
  fill(layer.parameter("excite.weight"), 0.0);
  fill(layer.parameter("excite.bias"), 0.0);
  Rng rng = make_stream(1, "x");
  const auto x = random_features(rng, 3, 4, 6);
  Tape tape;
  const auto out = layer.forward(tape, x, SymParameter({0.3, 0.7}));
  for (double m : out.attention.data()) CHECK(m == 0.5);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(out.features.at(i) == 0.5 * x.at(i));
}

TEST_CASE("gating is per channel and bounded") {
  Rng init = make_stream(2, "init");
  CcamLayer layer(5, 3, 2, init);
  Rng rng = make_stream(2, "x");
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_features(rng, 2, 3, 5);
    Tape tape;
    const auto out = layer.forward(tape, x, SymParameter({0.2, 0.5, 0.3}));
    CHECK(out.attention.shape() == Shape{1, 1, 5});
    for (double m : out.attention.data()) {
      CHECK(m > 0.0);
      CHECK(m < 1.0);
    }
    for (std::size_t p = 0; p < 6; ++p)
      for (std::size_t c = 0; c < 5; ++c) {
        const double y = out.features.at(p * 5 + c);
        CHECK(y == out.attention.at(c) * x.at(p * 5 + c));
        CHECK(std::abs(y) <= std::abs(x.at(p * 5 + c)));
      }
  }
}

TEST_CASE("zero features stay zero") {
  Rng init = make_stream(3, "init");
  CcamLayer layer(4, 2, 4, init);
  Tape tape;
  for (double w : {0.0, 0.4, 1.0}) {
    const auto out = layer.forward(tape, Tensor::zeros({2, 2, 4}), SymParameter({w, 1.0 - w}));
    for (double y : out.features.data()) CHECK(y == 0.0);
  }
}

TEST_CASE("spatial permutation equivariance") {
  Rng init = make_stream(4, "init");
  CcamLayer layer(3, 2, 4, init);
  Rng rng = make_stream(4, "x");
  const auto x = random_features(rng, 2, 3, 3);
  const std::size_t perm[] = {5, 2, 0, 4, 1, 3};
  std::vector<double> px(x.size());
  for (std::size_t p = 0; p < 6; ++p)
    for (std::size_t c = 0; c < 3; ++c) px[p * 3 + c] = x.at(perm[p] * 3 + c);
  Tape tape;
  const SymParameter s({0.6, 0.4});
  const auto a = layer.forward(tape, x, s);
  const auto b = layer.forward(tape, Tensor({2, 3, 3}, px), s);
  for (std::size_t c = 0; c < 3; ++c) CHECK(a.attention.at(c) == doctest::Approx(b.attention.at(c)).epsilon(1e-15));
  for (std::size_t p = 0; p < 6; ++p)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(b.features.at(p * 3 + c) == doctest::Approx(a.features.at(perm[p] * 3 + c)).epsilon(1e-15));
}

TEST_CASE("dimension mismatches") {
  Rng init = make_stream(5, "init");
  CcamLayer layer(4, 2, 4, init);
  Tape tape;
  CHECK_THROWS_AS(layer.forward(tape, Tensor::zeros({2, 2, 3}), SymParameter({0.5, 0.5})), UsageError);
  CHECK_THROWS_AS(layer.forward(tape, Tensor::zeros({2, 2, 4}), SymParameter({0.2, 0.3, 0.5})), UsageError);
}

TEST_CASE("gradient checks against finite differences") {
  const auto res = ccam_gradient_check(0);
  CHECK(res.entries.size() == 8);
  for (const auto& e : res.entries) {
    CAPTURE(e.name);
    CHECK(e.rel_error < 1e-6);
  }
  for (std::uint64_t seed = 1; seed < 6; ++seed) CHECK(ccam_gradient_check(seed, 3, 2, 5, 2, 2).passed(1e-6));
}

TEST_CASE("concat inject") {
  Rng rng = make_stream(6, "x");
  const auto x = random_features(rng, 3, 2, 4);
  const SymParameter s({0.1, 0.2, 0.7});
  Tape tape;
  const auto y = concat_inject(tape, x, s);
  CHECK(y.shape() == Shape{3, 2, 7});
  for (std::size_t p = 0; p < 6; ++p) {
    for (std::size_t c = 0; c < 4; ++c) CHECK(y.at(p * 7 + c) == x.at(p * 4 + c));
    for (std::size_t j = 0; j < 3; ++j) CHECK(y.at(p * 7 + 4 + j) == s[j]);
  }
  const auto degenerate = concat_inject(tape, Tensor({1, 1, 0}, {}), SymParameter({0.25, 0.75}));
  CHECK(degenerate.shape() == Shape{1, 1, 2});
  CHECK(degenerate.at(0) == 0.25);
  CHECK(degenerate.at(1) == 0.75);
}

TEST_CASE("sensitivity table") {
  Rng init = make_stream(7, "init");
  CcamLayer layer(6, 3, 4, init);
  Rng rng = make_stream(7, "x");
  const auto x = random_features(rng, 2, 2, 6);
  const SymParameter s({0.2, 0.3, 0.5});
  const auto same = ccam_sensitivity(layer, x, {s, s});
  CHECK(same.gates[0] == same.gates[1]);

  const auto grid = simplex_grid(3, 4);
  CHECK(grid.size() == 15);
  const auto live = ccam_sensitivity(layer, x, grid);
  CHECK(live.gates.size() == 15);
  for (std::size_t c = 0; c < 6; ++c) CHECK(live.channel_min[c] <= live.channel_max[c]);

  fill(layer.parameter("embed.weight"), 0.0);
  fill(layer.parameter("embed.bias"), 0.0);
  const auto severed = ccam_sensitivity(layer, x, grid);
  for (const auto& row : severed.gates) CHECK(row == severed.gates[0]);
  CHECK(severed.max_spread() == 0.0);

  std::ostringstream os;
  write_attention_csv(os, live);
  const std::string text = os.str();
  const std::string header = text.substr(0, text.find('\n'));
  CHECK(header == "s_1,s_2,s_3,M_1,M_2,M_3,M_4,M_5,M_6");
}

TEST_CASE("simplex grid") {
  for (const auto& s : simplex_grid(2, 4)) CHECK(s.on_simplex());
  CHECK(simplex_grid(2, 4).size() == 5);
  CHECK(simplex_grid(4, 3).size() == 20);
}
