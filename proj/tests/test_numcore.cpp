// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "oracles.hpp"
#include "trimodal/checkpoint.hpp"
#include "trimodal/errors.hpp"
#include "trimodal/gradcheck.hpp"
#include "trimodal/ops.hpp"
#include "trimodal/params.hpp"
#include "trimodal/rng.hpp"
#include "trimodal/tape.hpp"

using namespace trimodal;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

}  // namespace

TEST_CASE("tensor invariants") {
    Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.at(1, 2) == 6.0);
    CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), DimensionError);
    CHECK_THROWS_AS(Tensor({0}, {}), DimensionError);
    CHECK(Tensor::scalar(1.5).is_scalar());
}

TEST_CASE("matmul matches identity, hand arithmetic and triple-loop oracle") {
    Tape tape;
    // identity passthrough
    Var eye = constant(tape, Tensor::matrix(2, 2, {1, 0, 0, 1}));
    Var a = constant(tape, Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    Var prod = matmul(eye, a);
    for (std::size_t i = 0; i < 6; ++i) CHECK(prod.val().data[i] == a.val().data[i]);

    // hand arithmetic
    Var m = constant(tape, Tensor::matrix(2, 2, {1, 2, 3, 4}));
    Var v = constant(tape, Tensor::matrix(2, 1, {0, 1}));
    Var mv = matmul(m, v);
    CHECK(mv.val().data[0] == doctest::Approx(2.0));
    CHECK(mv.val().data[1] == doctest::Approx(4.0));

    // random vs oracle
    Rng rng(11);
    Tensor x = random_tensor({3, 4}, rng);
    Tensor y = random_tensor({4, 2}, rng);
    oracle::Mat ox(3, std::vector<double>(4)), oy(4, std::vector<double>(2));
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) ox[r][c] = x.at(r, c);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 2; ++c) oy[r][c] = y.at(r, c);
    oracle::Mat expected = oracle::matmul(ox, oy);
    Var got = matmul(constant(tape, x), constant(tape, y));
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c)
            CHECK(got.val().at(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-12));

    // shape mismatch names both shapes
    try {
        matmul(constant(tape, Tensor::zeros({2, 3})), constant(tape, Tensor::zeros({2, 3})));
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[2x3]") != std::string::npos);
    }
}

TEST_CASE("softmax simplex contract and stability") {
    Tape tape;
    Var z = constant(tape, Tensor::vector({0.0, 0.0}));
    Var s = softmax(z, 0);
    CHECK(s.val().data[0] == doctest::Approx(0.5));
    CHECK(s.val().data[1] == doctest::Approx(0.5));

    Var big = softmax(constant(tape, Tensor::vector({1000.0, 0.0})), 0);
    CHECK(big.val().all_finite());
    CHECK(big.val().data[0] == doctest::Approx(1.0));
    CHECK(big.val().data[1] == doctest::Approx(0.0).epsilon(1e-300));

    auto expected = oracle::softmax({1.0, 2.0, 3.0});
    Var s3 = softmax(constant(tape, Tensor::vector({1.0, 2.0, 3.0})), 0);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(s3.val().data[i] == doctest::Approx(expected[i]).epsilon(1e-14));

    // rows of a random matrix sum to 1 along either axis
    Rng rng(3);
    Tensor m = random_tensor({4, 5}, rng, -8.0, 8.0);
    Var sm1 = softmax(constant(tape, m), 1);
    for (std::size_t r = 0; r < 4; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < 5; ++c) {
            double p = sm1.val().at(r, c);
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
    Var sm0 = softmax(constant(tape, m), 0);
    for (std::size_t c = 0; c < 5; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < 4; ++r) sum += sm0.val().at(r, c);
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("backward basics: ones, 2x, reuse accumulation") {
    {
        Tape tape;
        Var x = tape.leaf(Tensor::matrix(2, 3, {1, -2, 3, 4, 5, -6}));
        Var loss = sum_all(x);
        tape.backward(loss);
        Tensor g = tape.gradient(x);
        for (double v : g.data) CHECK(v == 1.0);
    }
    {
        Tape tape;
        Var x = tape.leaf(Tensor::vector({3.0}));
        Var loss = sum_all(mul(x, x));
        tape.backward(loss);
        CHECK(tape.gradient(x).data[0] == doctest::Approx(6.0));
    }
    {
        // value used twice accumulates: d(x + x)/dx = 2
        Tape tape;
        Var x = tape.leaf(Tensor::vector({1.5}));
        Var loss = sum_all(add(x, x));
        tape.backward(loss);
        CHECK(tape.gradient(x).data[0] == 2.0);
    }
    {
        Tape tape;
        Var x = tape.leaf(Tensor::vector({1.0, 2.0}));
        CHECK_THROWS_AS(tape.backward(x), ContractError);  // non-scalar loss
    }
}

TEST_CASE("composite chain matches finite differences") {
    ParamStore params;
    Rng rng(5);
    params.add("w", random_tensor({3, 4}, rng, -1.0, 1.0));
    params.add("x", random_tensor({2, 3}, rng, -1.0, 1.0));
    auto f = [](Tape& t, VarMap& v) {
        Var z = matmul(v.at("x"), v.at("w"));
        Var p = softmax(z, 1);
        Var lp = log(p);
        return mean_all(lp);
    };
    auto report = grad_check(f, params, 1e-5, 1e-6);
    CHECK(report.pass);
}

TEST_CASE("grad_check basics and negative control") {
    ParamStore params;
    params.add("x", Tensor::vector({0.5, -1.25, 2.0}));
    auto f = [](Tape& t, VarMap& v) { return sum_all(mul(v.at("x"), v.at("x"))); };
    auto report = grad_check(f, params, 1e-5, 1e-6);
    CHECK(report.pass);

    CHECK_THROWS_AS(grad_check(f, params, 0.0, 1e-6), ContractError);

    // grl corrupts the analytic gradient on purpose; the checker must notice.
    auto broken = [](Tape& t, VarMap& v) {
        Var y = grl(v.at("x"), 1.0);
        return sum_all(mul(y, y));
    };
    auto bad = grad_check(broken, params, 1e-5, 1e-4);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst() != nullptr);

    // non-deterministic function is rejected
    auto flaky = [](Tape& t, VarMap& v) {
        static int calls = 0;
        ++calls;
        return mul_scalar(sum_all(v.at("x")), 1.0 + 0.001 * calls);
    };
    CHECK_THROWS_AS(grad_check(flaky, params, 1e-5, 1e-4), ContractError);
}

TEST_CASE("every primitive op passes finite-difference checks over 20 seeds") {
    struct Case {
        const char* name;
        std::function<Var(Tape&, VarMap&)> f;
        std::vector<std::pair<const char*, std::vector<std::size_t>>> inputs;
    };
    std::vector<Case> cases;
    auto in1 = [](std::vector<std::size_t> s) {
        return std::vector<std::pair<const char*, std::vector<std::size_t>>>{{"a", std::move(s)}};
    };
    cases.push_back({"add", [](Tape&, VarMap& v) { return sum_all(mul(add(v.at("a"), v.at("b")), v.at("b"))); },
                     {{"a", {3, 4}}, {"b", {3, 4}}}});
    cases.push_back({"sub", [](Tape&, VarMap& v) { return sum_all(mul(sub(v.at("a"), v.at("b")), v.at("a"))); },
                     {{"a", {3, 4}}, {"b", {3, 4}}}});
    cases.push_back({"mul", [](Tape&, VarMap& v) { return sum_all(mul(v.at("a"), v.at("b"))); },
                     {{"a", {2, 5}}, {"b", {2, 5}}}});
    cases.push_back({"div", [](Tape&, VarMap& v) { return sum_all(div(v.at("a"), add_scalar(mul(v.at("b"), v.at("b")), 1.0))); },
                     {{"a", {2, 3}}, {"b", {2, 3}}}});
    cases.push_back({"scalar_ops", [](Tape&, VarMap& v) { return sum_all(add_scalar(mul_scalar(v.at("a"), -1.7), 0.3)); },
                     in1({4})});
    cases.push_back({"exp", [](Tape&, VarMap& v) { return sum_all(exp(v.at("a"))); }, in1({3, 3})});
    cases.push_back({"log", [](Tape&, VarMap& v) { return sum_all(log(add_scalar(mul(v.at("a"), v.at("a")), 0.1))); },
                     in1({3, 3})});
    cases.push_back({"relu", [](Tape&, VarMap& v) { return sum_all(relu(v.at("a"))); }, in1({4, 4})});
    cases.push_back({"gelu", [](Tape&, VarMap& v) { return sum_all(gelu(v.at("a"))); }, in1({4, 4})});
    cases.push_back({"sigmoid", [](Tape&, VarMap& v) { return sum_all(sigmoid(v.at("a"))); }, in1({4, 4})});
    cases.push_back({"tanh", [](Tape&, VarMap& v) { return sum_all(tanh(v.at("a"))); }, in1({4, 4})});
    cases.push_back({"pow_int", [](Tape&, VarMap& v) { return sum_all(pow_int(v.at("a"), 3)); }, in1({5})});
    cases.push_back({"cos_acos", [](Tape&, VarMap& v) { return sum_all(cos(acos_clamped(mul_scalar(tanh(v.at("a")), 0.9)))); },
                     in1({6})});
    cases.push_back({"mean_axis0", [](Tape&, VarMap& v) { return l2_norm(mean_axis(v.at("a"), 0)); }, in1({4, 3})});
    cases.push_back({"mean_axis1", [](Tape&, VarMap& v) { return l2_norm(mean_axis(v.at("a"), 1)); }, in1({4, 3})});
    cases.push_back({"variance_axis0", [](Tape&, VarMap& v) { return sum_all(variance_axis(v.at("a"), 0)); }, in1({4, 3})});
    cases.push_back({"variance_axis1", [](Tape&, VarMap& v) { return sum_all(variance_axis(v.at("a"), 1)); }, in1({4, 3})});
    cases.push_back({"l2_norm", [](Tape&, VarMap& v) { return l2_norm(v.at("a")); }, in1({3, 3})});
    cases.push_back({"matmul", [](Tape&, VarMap& v) { return sum_all(matmul(v.at("a"), v.at("b"))); },
                     {{"a", {3, 4}}, {"b", {4, 2}}}});
    cases.push_back({"transpose", [](Tape&, VarMap& v) { return sum_all(mul(transpose(v.at("a")), transpose(v.at("a")))); },
                     in1({2, 5})});
    cases.push_back({"concat_slice", [](Tape&, VarMap& v) {
                         Var c = concat_rows({v.at("a"), v.at("b")});
                         Var s = slice_rows(c, 1, 4);
                         Var cc = concat_cols({s, s});
                         return sum_all(mul(slice_cols(cc, 1, 5), slice_cols(cc, 2, 6)));
                     },
                     {{"a", {2, 4}}, {"b", {3, 4}}}});
    cases.push_back({"softmax_rows", [](Tape&, VarMap& v) { return sum_all(mul(softmax(v.at("a"), 1), v.at("b"))); },
                     {{"a", {3, 5}}, {"b", {3, 5}}}});
    cases.push_back({"softmax_cols", [](Tape&, VarMap& v) { return sum_all(mul(softmax(v.at("a"), 0), v.at("b"))); },
                     {{"a", {3, 5}}, {"b", {3, 5}}}});
    cases.push_back({"logsumexp_rows", [](Tape&, VarMap& v) { return sum_all(logsumexp_rows(v.at("a"))); },
                     in1({3, 4})});
    cases.push_back({"linear", [](Tape&, VarMap& v) { return sum_all(linear(v.at("a"), v.at("w"), v.at("b"))); },
                     {{"a", {3, 4}}, {"w", {4, 2}}, {"b", {2}}}});
    cases.push_back({"layer_norm", [](Tape&, VarMap& v) { return sum_all(mul(layer_norm(v.at("a"), v.at("g"), v.at("b")), v.at("a"))); },
                     {{"a", {3, 6}}, {"g", {6}}, {"b", {6}}}});
    cases.push_back({"sum_pool_cols", [](Tape&, VarMap& v) { return l2_norm(sum_pool_cols(v.at("a"), 2)); },
                     in1({3, 6})});
    cases.push_back({"mean_rows_broadcast", [](Tape&, VarMap& v) {
                         Var m = mean_rows(v.at("a"));
                         return sum_all(mul(broadcast_row(m, 4), v.at("a")));
                     },
                     in1({4, 3})});
    cases.push_back({"normalize_rows_zero", [](Tape&, VarMap& v) { return sum_all(mul(normalize_rows(v.at("a"), NormalizeMode::kZeroToZero), v.at("a"))); },
                     in1({3, 4})});
    cases.push_back({"normalize_rows_eps", [](Tape&, VarMap& v) { return sum_all(mul(normalize_rows(v.at("a"), NormalizeMode::kEpsAdd), v.at("a"))); },
                     in1({3, 4})});
    cases.push_back({"normalize_cols", [](Tape&, VarMap& v) { return sum_all(mul(normalize_cols(v.at("a"), NormalizeMode::kEpsAdd), v.at("a"))); },
                     in1({4, 3})});

    for (const auto& c : cases) {
        CAPTURE(c.name);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(1000 + seed);
            ParamStore params;
            for (const auto& [name, shape] : c.inputs) {
                params.add(name, random_tensor(shape, rng));
            }
            auto report = grad_check(c.f, params, 1e-5, 1e-4);
            if (!report.pass) {
                MESSAGE("op ", c.name, " seed ", seed, ": ", report.summary());
            }
            CHECK(report.pass);
        }
    }
}

TEST_CASE("grl forward identity, exact backward scaling") {
    Tape tape;
    Rng rng(9);
    Tensor x = random_tensor({3, 4}, rng);
    Var in = tape.leaf(x);
    Var out = grl(in, 1.0);
    CHECK(std::memcmp(out.val().data.data(), x.data.data(), sizeof(double) * x.numel()) == 0);

    // lambda = 1: upstream g becomes -g; lambda = 0.5 halves it
    for (double lambda : {1.0, 0.5}) {
        Tape t2;
        Var p = t2.leaf(x);
        Var y = grl(p, lambda);
        Var loss = sum_all(y);
        t2.backward(loss);
        Tensor g = t2.gradient(p);
        for (double v : g.data) CHECK(v == -lambda);
    }
}

TEST_CASE("dropout: identity at rate 0, mask scaling otherwise, off-path determinism") {
    Tape tape;
    Rng rng(4);
    Var x = tape.leaf(Tensor::full({50}, 1.0));
    Rng drop_rng(7);
    Var same = dropout(x, 0.0, drop_rng);
    CHECK(same.id == x.id);
    Var dropped = dropout(x, 0.5, drop_rng);
    for (double v : dropped.val().data) CHECK((v == 0.0 || v == doctest::Approx(2.0)));
}

TEST_CASE("adam drives a quadratic to its minimum deterministically") {
    auto run = [] {
        ParamStore params;
        params.add("x", Tensor::vector({5.0, -3.0}));
        Adam opt(params, 0.1);
        for (int i = 0; i < 400; ++i) {
            Tape tape;
            VarMap vars = lease_params(tape, params);
            Var loss = sum_all(mul(vars.at("x"), vars.at("x")));
            tape.backward(loss);
            opt.step(tape, vars);
        }
        return params.at("x");
    };
    Tensor a = run();
    Tensor b = run();
    CHECK(std::fabs(a.data[0]) < 1e-3);
    CHECK(std::fabs(a.data[1]) < 1e-3);
    CHECK(std::memcmp(a.data.data(), b.data.data(), sizeof(double) * 2) == 0);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    Rng rng(21);
    ParamStore params;
    params.add("enc.w", random_tensor({4, 6}, rng));
    params.add("enc.b", random_tensor({6}, rng));
    params.add("head.w", random_tensor({6, 1}, rng));
    std::string base = "ckpt_test_roundtrip";
    save_checkpoint(params, base);
    ParamStore loaded = load_checkpoint(base);
    REQUIRE(loaded.names() == params.names());
    for (const auto& name : params.names()) {
        const Tensor& a = params.at(name);
        const Tensor& b = loaded.at(name);
        REQUIRE(a.shape == b.shape);
        CHECK(std::memcmp(a.data.data(), b.data.data(), sizeof(double) * a.numel()) == 0);
    }
    std::remove((base + ".json").c_str());
    std::remove((base + ".bin").c_str());
}

TEST_CASE("xavier init is seeded and within bounds") {
    Rng rng1(3), rng2(3);
    ParamStore a, b;
    a.add_weight("w", 8, 8, rng1);
    b.add_weight("w", 8, 8, rng2);
    CHECK(std::memcmp(a.at("w").data.data(), b.at("w").data.data(), sizeof(double) * 64) == 0);
    double bound = std::sqrt(6.0 / 16.0);
    for (double v : a.at("w").data) CHECK(std::fabs(v) <= bound);
}
