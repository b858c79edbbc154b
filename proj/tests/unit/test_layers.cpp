#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "common/errors.hpp"
#include "nn/graph.hpp"
#include "nn/layers.hpp"

using namespace nmp;
using namespace nmp::nn;

namespace {

Tensor<double> randomTensor(Shape dims, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    Tensor<double> t(std::move(dims));
    for (double& v : t.storage())
        v = n(rng);
    return t;
}

double dot(const Tensor<double>& a, const Tensor<double>& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

// Small composed network: conv -> BN(train) -> relu -> conv(stride 3) ->
// sigmoid, concatenated with a stride-3 branch of the input.
struct Net {
    Tensor<double> x, w1, b1, g1, be1, w2, b2, w3, b3;
    Tensor<double> mean{{2}, 0.0}, var{{2}, 1.0};
    BatchNormMode mode = BatchNormMode::Training;

    double loss(const Tensor<double>& probe, Graph<double>* keep = nullptr,
                std::vector<Graph<double>::NodeId>* ids = nullptr)
    {
        Graph<double> local;
        Graph<double>& g = keep ? *keep : local;
        Tensor<double> m = mean, v = var;
        const auto xi = g.parameter(x);
        const auto p1 = g.parameter(w1), q1 = g.parameter(b1);
        const auto pg = g.parameter(g1), pb = g.parameter(be1);
        const auto p2 = g.parameter(w2), q2 = g.parameter(b2);
        const auto p3 = g.parameter(w3), q3 = g.parameter(b3);
        const auto c1 = g.conv2d(xi, p1, q1, {1, 2, 3, 5, 1});
        const auto bn = g.batchNorm(c1, pg, pb, {&m, &v, 0.99, kBatchNormEps}, mode);
        const auto r = g.relu(bn);
        const auto c2 = g.conv2d(r, p2, q2, {2, 1, 3, 3, 3});
        const auto s = g.sigmoid(c2);
        const auto c3 = g.conv2d(xi, p3, q3, {1, 1, 1, 3, 3});
        const auto cat = g.concatChannels(s, c3);
        if (ids)
            *ids = {xi, p1, q1, pg, pb, p2, q2, p3, q3, cat};
        return dot(g.value(cat), probe);
    }

    std::vector<Tensor<double>*> params() { return {&x, &w1, &b1, &g1, &be1, &w2, &b2, &w3, &b3}; }
};

Net makeNet(std::mt19937_64& rng)
{
    Net n;
    n.x = randomTensor({2, 1, 4, 9}, rng);
    n.w1 = randomTensor({2, 1, 3, 5}, rng, 0.5);
    n.b1 = randomTensor({2}, rng);
    n.g1 = randomTensor({2}, rng);
    n.be1 = randomTensor({2}, rng);
    n.w2 = randomTensor({1, 2, 3, 3}, rng, 0.5);
    n.b2 = randomTensor({1}, rng);
    n.w3 = randomTensor({1, 1, 1, 3}, rng);
    n.b3 = randomTensor({1}, rng);
    n.var = Tensor<double>({2}, std::vector<double>{0.7, 1.9});
    n.mean = Tensor<double>({2}, std::vector<double>{0.2, -0.4});
    return n;
}

} // namespace

TEST_CASE("batch norm inference matches the affine formula")
{
    std::mt19937_64 rng(1);
    const auto x = randomTensor({2, 3, 4, 5}, rng);
    const Tensor<double> gamma({3}, std::vector<double>{1.5, -0.5, 2.0});
    const Tensor<double> beta({3}, std::vector<double>{0.1, 0.2, -0.3});
    const Tensor<double> mean({3}, std::vector<double>{0.5, -1.0, 0.0});
    const Tensor<double> var({3}, std::vector<double>{1.0, 4.0, 0.0});
    const auto y = batchNormInfer(x, BatchNormParams<double>{gamma, beta, mean, var});
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t t = 0; t < 4; ++t)
                for (std::size_t f = 0; f < 5; ++f) {
                    const double want = (x.at(n, c, t, f) - mean[c]) / std::sqrt(var[c] + 1e-3) * gamma[c] + beta[c];
                    CHECK(y.at(n, c, t, f) == doctest::Approx(want).epsilon(1e-12));
                }
    const Tensor<double> bad({3}, std::vector<double>{1.0, -1.0, 1.0});
    CHECK_THROWS_AS(batchNormInfer(x, BatchNormParams<double>{gamma, beta, mean, bad}), ContractError);
    const Tensor<double> shortGamma({2}, 1.0);
    CHECK_THROWS_AS(batchNormInfer(x, BatchNormParams<double>{shortGamma, beta, mean, var}), ContractError);
}

TEST_CASE("batch norm training uses biased batch statistics")
{
    std::mt19937_64 rng(2);
    const auto x = randomTensor({3, 2, 5, 7}, rng, 3.0);
    const Tensor<double> gamma({2}, 1.0), beta({2}, 0.0);
    std::vector<double> mean, var;
    const auto y = batchNormTrain(x, gamma, beta, 1e-3, mean, var);
    for (std::size_t c = 0; c < 2; ++c) {
        double s = 0, s2 = 0, ys = 0, ys2 = 0;
        const double count = 3 * 5 * 7;
        for (std::size_t n = 0; n < 3; ++n)
            for (std::size_t i = 0; i < 35; ++i) {
                const double v = x[x.offset(n, c, 0, 0) + i];
                const double u = y[y.offset(n, c, 0, 0) + i];
                s += v;
                s2 += v * v;
                ys += u;
                ys2 += u * u;
            }
        const double m = s / count;
        CHECK(mean[c] == doctest::Approx(m).epsilon(1e-12));
        CHECK(var[c] == doctest::Approx(s2 / count - m * m).epsilon(1e-10));
        CHECK(std::abs(ys / count) < 1e-12);
        CHECK(ys2 / count == doctest::Approx(var[c] / (var[c] + 1e-3)).epsilon(1e-10));
    }
}

TEST_CASE("running statistics follow momentum 0.99")
{
    std::mt19937_64 rng(3);
    Tensor<double> mean({1}, 1.0), var({1}, 2.0);
    const auto x = randomTensor({2, 1, 3, 4}, rng);
    std::vector<double> bm, bv;
    batchNormTrain(x, Tensor<double>({1}, 1.0), Tensor<double>({1}, 0.0), 1e-3, bm, bv);
    Graph<double> g;
    const auto xi = g.input(x);
    const auto ga = g.parameter(Tensor<double>({1}, 1.0));
    const auto be = g.parameter(Tensor<double>({1}, 0.0));
    g.batchNorm(xi, ga, be, {&mean, &var}, BatchNormMode::Training);
    CHECK(mean[0] == doctest::Approx(0.99 * 1.0 + 0.01 * bm[0]).epsilon(1e-14));
    CHECK(var[0] == doctest::Approx(0.99 * 2.0 + 0.01 * bv[0]).epsilon(1e-14));
    Graph<double> inf;
    inf.batchNorm(inf.input(x), inf.parameter(Tensor<double>({1}, 1.0)), inf.parameter(Tensor<double>({1}, 0.0)),
                  {&mean, &var}, BatchNormMode::Inference);
    CHECK(mean[0] == doctest::Approx(0.99 * 1.0 + 0.01 * bm[0]).epsilon(1e-14));
}

TEST_CASE("relu, sigmoid and concat")
{
    const Tensor<float> x({1, 1, 1, 5}, std::vector<float>{-2.f, -0.f, 0.f, 3.f, 1e30f});
    const auto r = relu(x);
    CHECK(r[0] == 0.f);
    CHECK(r[3] == 3.f);
    CHECK(r[4] == 1e30f);

    const Tensor<float> big({1, 1, 1, 4}, std::vector<float>{-1e30f, -50.f, 50.f, 1e30f});
    const auto sb = sigmoid(big);
    for (float v : sb.values()) {
        CHECK(v > 0.f);
        CHECK(v < 1.f);
    }
    const Tensor<double> bigD({1, 1, 1, 2}, std::vector<double>{-1e300, 1e300});
    const auto sd = sigmoid(bigD);
    for (double v : sd.values()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    CHECK(sigmoidScalar(0.0) == 0.5);
    CHECK(sigmoidScalar(2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-15));

    const Tensor<double> a({2, 1, 1, 2}, std::vector<double>{1, 2, 3, 4});
    const Tensor<double> b({2, 2, 1, 2}, std::vector<double>{5, 6, 7, 8, 9, 10, 11, 12});
    const auto c = concatChannels(a, b);
    CHECK(c.dims() == Shape{2, 3, 1, 2});
    CHECK(std::vector<double>(c.values().begin(), c.values().end())
          == std::vector<double>{1, 2, 5, 6, 7, 8, 3, 4, 9, 10, 11, 12});
    CHECK_THROWS_AS(concatChannels(a, Tensor<double>({2, 1, 2, 2})), ContractError);
}

TEST_CASE("composed graph gradients match finite differences")
{
    for (auto mode : {BatchNormMode::Training, BatchNormMode::Inference}) {
        std::mt19937_64 rng(mode == BatchNormMode::Training ? 10 : 11);
        Net net = makeNet(rng);
        net.mode = mode;
        const auto probe = randomTensor({2, 2, 4, 3}, rng);
        Graph<double> g;
        std::vector<Graph<double>::NodeId> ids;
        net.loss(probe, &g, &ids);
        const Graph<double>::Seed seed{ids.back(), &probe};
        g.backward(std::span(&seed, 1));

        const auto params = net.params();
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor<double>& t = *params[p];
            const Tensor<double>& analytic = g.grad(ids[p]);
            REQUIRE(analytic.sameShape(t));
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double keep = t[i];
                const double h = 1e-6 * std::max(1.0, std::abs(keep));
                t[i] = keep + h;
                const double up = net.loss(probe);
                t[i] = keep - h;
                const double down = net.loss(probe);
                t[i] = keep;
                const double numeric = (up - down) / (2 * h);
                CAPTURE(p);
                CAPTURE(i);
                CHECK(std::abs(analytic[i] - numeric) <= 1e-4 * std::max(1.0, std::abs(numeric)));
            }
        }
    }
}

TEST_CASE("graph state errors")
{
    Graph<double> g;
    const auto x = g.parameter(Tensor<double>({1, 1, 1, 1}, 1.0));
    CHECK_THROWS_AS(g.grad(x), StateError);
    const Tensor<double> seedT({1, 1, 1, 1}, 1.0);
    const Graph<double>::Seed seed{x, &seedT};
    CHECK_THROWS_AS(g.backward(std::span(&seed, 1)), StateError);

    Graph<double> noRecord(false);
    const auto y = noRecord.relu(noRecord.input(Tensor<double>({1, 1, 1, 1}, 1.0)));
    const Graph<double>::Seed s2{y, &seedT};
    CHECK_THROWS_AS(noRecord.backward(std::span(&s2, 1)), StateError);

    Graph<double> shapes;
    const auto r = shapes.relu(shapes.parameter(Tensor<double>({1, 1, 2, 2}, 1.0)));
    const Graph<double>::Seed wrong{r, &seedT};
    CHECK_THROWS_AS(shapes.backward(std::span(&wrong, 1)), ContractError);
}

TEST_CASE("unreached gradients are zero and evaluation is bit-identical")
{
    std::mt19937_64 rng(4);
    Net net = makeNet(rng);
    const auto probe = randomTensor({2, 2, 4, 3}, rng);
    const double a = net.loss(probe);
    const double b = net.loss(probe);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);

    Graph<double> g;
    const auto x = g.parameter(Tensor<double>({1, 1, 2, 2}, 1.0));
    const auto unused = g.parameter(Tensor<double>({3}, 1.0));
    const auto r = g.relu(x);
    const Tensor<double> seedT({1, 1, 2, 2}, 2.0);
    const Graph<double>::Seed seed{r, &seedT};
    g.backward(std::span(&seed, 1));
    CHECK(g.grad(unused).dims() == Shape{3});
    for (double v : g.grad(unused).values())
        CHECK(v == 0.0);
    for (double v : g.grad(x).values())
        CHECK(v == 2.0);
}
