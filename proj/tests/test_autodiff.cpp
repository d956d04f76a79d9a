#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "semcom/optimizer.hpp"
#include "semcom/serialize.hpp"

using namespace semcom;
using testutil::fd_max_rel_err;
using testutil::random_tensor;

TEST_CASE("forward primitives: fixed-point examples") {
  Tensor s = softmax(Tensor::from({2}, {0.0, 0.0}));
  CHECK(s.values()[0] == Catch::Approx(0.5).margin(1e-15));
  CHECK(s.values()[1] == Catch::Approx(0.5).margin(1e-15));

  CHECK(tanh(Tensor::scalar(0.0)).item() == 0.0);

  // affine with identity weights, zero bias is the identity
  Tensor x = Tensor::from({1, 3}, {0.3, -0.7, 2.0});
  Tensor eye = Tensor::zeros({3, 3});
  for (int i = 0; i < 3; ++i) eye.values()[i * 3 + i] = 1.0;
  Tensor y = linear(x, eye, Tensor::zeros({3}));
  for (int i = 0; i < 3; ++i) CHECK(y.values()[i] == x.values()[i]);
}

TEST_CASE("matmul matches a triple-loop oracle") {
  Rng rng(42);
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({4, 2}, rng);
  Tensor c = matmul(a, b);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < 4; ++l) acc += a.values()[i * 4 + l] * b.values()[l * 2 + j];
      CHECK(std::fabs(c.values()[i * 2 + j] - acc) < 1e-12);
    }
}

TEST_CASE("shape mismatches fail with the op name and both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4});
  CHECK_THROWS_WITH(add(a, b), Catch::Matchers::ContainsSubstring("add") &&
                                   Catch::Matchers::ContainsSubstring("[2,3]") &&
                                   Catch::Matchers::ContainsSubstring("[4]"));
  CHECK_THROWS_WITH(matmul(a, Tensor::zeros({2, 2})),
                    Catch::Matchers::ContainsSubstring("matmul"));
}

TEST_CASE("backward: basic identities") {
  SECTION("d(x^2)/dx = 2x") {
    Tensor x = Tensor::scalar(3.0).set_requires_grad();
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = square(x);
    tape.backward(loss);
    CHECK(x.grad()[0] == Catch::Approx(6.0));
  }
  SECTION("d sum(a*b)/da = b") {
    Rng rng(1);
    Tensor a = random_tensor({5}, rng);
    a.set_requires_grad();
    Tensor b = random_tensor({5}, rng);
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(mul(a, b)));
    for (int i = 0; i < 5; ++i) CHECK(a.grad()[i] == Catch::Approx(b.values()[i]));
  }
  SECTION("gradients accumulate across backward calls until cleared") {
    Tensor x = Tensor::scalar(3.0).set_requires_grad();
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = square(x);
    tape.backward(loss);
    tape.backward(loss);
    CHECK(x.grad()[0] == Catch::Approx(12.0));
  }
  SECTION("backward on a non-scalar fails") {
    Tensor x = Tensor::from({2}, {1.0, 2.0}).set_requires_grad();
    Tape tape;
    TapeScope scope(tape);
    Tensor y = square(x);
    CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
  }
  SECTION("backward with an empty tape fails") {
    Tape tape;
    Tensor x = Tensor::scalar(1.0).set_requires_grad();
    CHECK_THROWS_AS(tape.backward(x), std::runtime_error);
  }
}

TEST_CASE("finite-difference gradient check for every primitive") {
  Rng rng(7);
  const double tol = 1e-4;

  auto check1 = [&](const char* name, const std::function<Tensor(const Tensor&)>& op, double lo,
                    double hi) {
    Tensor a = random_tensor({3, 4}, rng, lo, hi);
    a.set_requires_grad();
    Tensor w = random_tensor(op(a).shape(), rng);  // fixed projection to a scalar
    auto loss = [&]() { return sum(mul(op(a), w)); };
    INFO(name);
    CHECK(fd_max_rel_err(loss, {a}) < tol);
  };

  check1("tanh", [](const Tensor& t) { return tanh(t); }, -2.0, 2.0);
  check1("relu", [](const Tensor& t) { return relu(t); }, -2.0, 2.0);
  check1("sin", [](const Tensor& t) { return sin(t); }, -3.0, 3.0);
  check1("cos", [](const Tensor& t) { return cos(t); }, -3.0, 3.0);
  check1("square", [](const Tensor& t) { return square(t); }, -2.0, 2.0);
  check1("sqrt", [](const Tensor& t) { return sqrt(t); }, 0.1, 4.0);
  check1("reciprocal", [](const Tensor& t) { return reciprocal(t); }, 0.5, 3.0);
  check1("scale", [](const Tensor& t) { return scale(t, -1.7); }, -2.0, 2.0);
  check1("add_const", [](const Tensor& t) { return add_const(t, 0.3); }, -2.0, 2.0);
  check1("softmax", [](const Tensor& t) { return softmax(t); }, -2.0, 2.0);
  check1("mean_lastaxis+broadcast", [](const Tensor& t) { return mul(t, mean_lastaxis(t)); },
         -2.0, 2.0);
  check1("reshape", [](const Tensor& t) { return reshape(t, {4, 3}); }, -2.0, 2.0);
  check1("slice", [](const Tensor& t) { return concat(slice(t, 1, 2), slice(t, 0, 1)); }, -2.0,
         2.0);

  SECTION("binary ops with broadcasting") {
    Tensor a = random_tensor({3, 4}, rng);
    Tensor row = random_tensor({4}, rng);
    Tensor col = random_tensor({3, 1}, rng);
    Tensor sc = random_tensor({1}, rng, 0.5, 1.5);
    a.set_requires_grad();
    row.set_requires_grad();
    col.set_requires_grad();
    sc.set_requires_grad();
    Tensor w = random_tensor({3, 4}, rng);
    auto loss = [&]() {
      Tensor u = add(a, row);
      u = mul(u, col);
      u = sub(u, sc);
      u = mul(u, reciprocal(sc));
      return sum(mul(u, w));
    };
    CHECK(fd_max_rel_err(loss, {a, row, col, sc}) < tol);
  }

  SECTION("matmul, affine, reductions, concat, interleave") {
    Tensor x = random_tensor({2, 3}, rng);
    Tensor w1 = random_tensor({3, 4}, rng);
    Tensor b1 = random_tensor({4}, rng);
    Tensor m = random_tensor({4, 2}, rng);
    for (Tensor* t : {&x, &w1, &b1, &m}) t->set_requires_grad();
    auto loss = [&]() {
      Tensor h = linear(x, w1, b1);
      Tensor p = matmul(h, m);
      Tensor q = concat(p, p);
      Tensor r = interleave2(p, p);
      return add(add(mean(q), sum(r)), mean(mean_lastaxis(h)));
    };
    CHECK(fd_max_rel_err(loss, {x, w1, b1, m}) < tol);
  }
}

TEST_CASE("two-layer perceptron gradients match finite differences") {
  Rng rng(11);
  Tensor x = random_tensor({4, 6}, rng);
  Tensor y = random_tensor({4, 2}, rng);
  Tensor w1 = random_tensor({6, 8}, rng, -0.5, 0.5);
  Tensor b1 = random_tensor({8}, rng, -0.1, 0.1);
  Tensor w2 = random_tensor({8, 2}, rng, -0.5, 0.5);
  Tensor b2 = random_tensor({2}, rng, -0.1, 0.1);
  for (Tensor* t : {&w1, &b1, &w2, &b2}) t->set_requires_grad();

  auto loss = [&]() {
    Tensor h = tanh(linear(x, w1, b1));
    Tensor out = linear(h, w2, b2);
    return mean(square(sub(out, y)));
  };
  CHECK(fd_max_rel_err(loss, {w1, b1, w2, b2}) < 1e-4);
}

TEST_CASE("softmax rows are nonnegative and sum to one") {
  Rng rng(3);
  Tensor a = random_tensor({5, 7}, rng, -4.0, 4.0);
  Tensor s = softmax(a);
  for (std::size_t i = 0; i < 5; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      CHECK(s.values()[i * 7 + j] >= 0.0);
      acc += s.values()[i * 7 + j];
    }
    CHECK(std::fabs(acc - 1.0) < 1e-9);
  }
}

TEST_CASE("optimizer steps") {
  SECTION("plain gradient step on x^2 from 1 with rate 0.1 gives 0.8") {
    ParameterSet params;
    Tensor& x = params.add("x", Tensor::scalar(1.0));
    Tape tape;
    {
      TapeScope scope(tape);
      tape.backward(square(x));
    }
    SgdOptimizer().step(params, 0.1);
    CHECK(x.values()[0] == Catch::Approx(0.8));
    CHECK(x.grad()[0] == 0.0);  // cleared
  }

  SECTION("repeated steps on a convex quadratic reduce f monotonically") {
    ParameterSet params;
    Tensor& x = params.add("x", Tensor::from({2}, {2.0, -1.5}));
    SgdOptimizer opt;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 20; ++it) {
      Tape tape;
      TapeScope scope(tape);
      Tensor f = sum(square(x));
      tape.backward(f);
      CHECK(f.item() < prev);
      prev = f.item();
      opt.step(params, 0.1);
    }
  }

  SECTION("Adam matches a hand-computed two-step moment recursion") {
    ParameterSet params;
    Tensor& x = params.add("x", Tensor::scalar(1.0));
    AdamOptimizer opt;  // defaults: beta1 0.9, beta2 0.999, eps 1e-8
    const double lr = 0.1;

    // reference trace, written out literally
    double xr = 1.0, m = 0.0, v = 0.0;
    auto ref_step = [&](int t) {
      const double g = 2.0 * xr;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      const double mhat = m / (1.0 - std::pow(0.9, t));
      const double vhat = v / (1.0 - std::pow(0.999, t));
      xr -= lr * mhat / (std::sqrt(vhat) + 1e-8);
    };

    for (int t = 1; t <= 2; ++t) {
      Tape tape;
      {
        TapeScope scope(tape);
        tape.backward(square(x));
      }
      opt.step(params, lr);
      ref_step(t);
      CHECK(x.values()[0] == Catch::Approx(xr).margin(1e-15));
    }
  }

  SECTION("non-finite gradient fails naming the parameter") {
    ParameterSet params;
    Tensor& x = params.add("theta.weird", Tensor::scalar(1.0));
    x.grad()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH(SgdOptimizer().step(params, 0.1),
                      Catch::Matchers::ContainsSubstring("theta.weird"));
  }

  SECTION("duplicate parameter names are rejected") {
    ParameterSet params;
    params.add("a", Tensor::scalar(0.0));
    CHECK_THROWS_AS(params.add("a", Tensor::scalar(1.0)), std::invalid_argument);
  }
}

TEST_CASE("tape determinism: identical seed and inputs give bit-identical results") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    Tensor x = random_tensor({3, 5}, rng);
    Tensor w = random_tensor({5, 4}, rng);
    w.set_requires_grad();
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = mean(square(tanh(matmul(x, w))));
    tape.backward(loss);
    return std::make_pair(loss.item(), w.grad());
  };
  auto [l1, g1] = run(99);
  auto [l2, g2] = run(99);
  CHECK(l1 == l2);
  CHECK(g1 == g2);
}

TEST_CASE("parameter container round-trips bit-exactly") {
  Rng rng(5);
  ParameterSet params;
  params.add("enc.w1", random_tensor({4, 3}, rng));
  params.add("enc.b1", random_tensor({3}, rng));
  params.add("irs.p", random_tensor({8}, rng));

  const std::string path = "params_roundtrip.bin";
  save_params(params, path);
  ParameterSet loaded = load_params(path);
  REQUIRE(loaded.size() == params.size());
  for (const auto& [name, t] : params.items()) {
    REQUIRE(loaded.contains(name));
    CHECK(loaded.at(name).shape() == t.shape());
    CHECK(loaded.at(name).values() == t.values());  // bit-exact
  }
  std::remove(path.c_str());
}
