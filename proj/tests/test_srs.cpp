#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "srsgroup/srs.hpp"

using namespace srsgroup;

namespace {

RawSrsGrid tiny_grid(int n_rows, int n_prb)
{
    RawSrsGrid g;
    g.n_rows = n_rows;
    g.n_prb = n_prb;
    g.values.resize(static_cast<std::size_t>(n_rows) * n_prb);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_prb; ++c)
            g.at(r, c) = cdouble(r + 1, c);
    g.prsg_received.assign(g.n_prsg(), 1);
    return g;
}

} // namespace

TEST_CASE("band reduction counts: 273 PRBs -> 137 -> 46 subbands")
{
    ArrayConfig array;
    MultipathComponent mpc;
    mpc.delay = 2e-7;
    mpc.azimuth = 0.3;
    mpc.elevation = 0.1;
    mpc.amplitude_per_layer = {cdouble(1, 0), cdouble(0, 1)};
    CtfMatrix ctf = synthesize_ctf({mpc}, array, prb_center_frequencies(array));
    REQUIRE(ctf.n_freq == 273);

    RawSrsGrid raw = raw_grid_from_ctf(ctf);
    CHECK(raw.n_rows == 128);
    CHECK(raw.n_prb == 273);
    CHECK(raw.n_prsg() == 137);

    PrsgGrid paired = prb_pair_average(raw);
    CHECK(paired.n_cols == 137);
    PrsgGrid coarse = prsg_downsample(paired);
    CHECK(coarse.n_cols == 46);

    ForwardFiller filler(coarse.n_rows, coarse.n_cols);
    filler.fill(coarse);
    Snapshot snap = assemble_snapshot(coarse);
    CHECK(snap.features.size() == 128);
    CHECK(snap.cold_cols == 0);
    for (double f : snap.features)
        CHECK(std::isfinite(f));
    CHECK(*std::max_element(snap.features.begin(), snap.features.end()) > 0.0);
}

TEST_CASE("pair averaging and the odd tail subband")
{
    RawSrsGrid g = tiny_grid(2, 5);
    PrsgGrid p = prb_pair_average(g);
    REQUIRE(p.n_cols == 3);
    for (int r = 0; r < 2; ++r) {
        CHECK(p.at(r, 0) == 0.5 * (g.at(r, 0) + g.at(r, 1)));
        CHECK(p.at(r, 1) == 0.5 * (g.at(r, 2) + g.at(r, 3)));
        CHECK(p.at(r, 2) == g.at(r, 4));
    }

    RawSrsGrid even = tiny_grid(1, 6);
    CHECK(prb_pair_average(even).n_cols == 3);
}

TEST_CASE("decimation keeps every third column starting at zero")
{
    RawSrsGrid g = tiny_grid(2, 14); // 7 subbands
    PrsgGrid p = prb_pair_average(g);
    REQUIRE(p.n_cols == 7);
    p.received = {1, 0, 1, 0, 1, 0, 1};
    PrsgGrid d = prsg_downsample(p);
    REQUIRE(d.n_cols == 3);
    for (int r = 0; r < 2; ++r) {
        CHECK(d.at(r, 0) == p.at(r, 0));
        CHECK(d.at(r, 1) == p.at(r, 3));
        CHECK(d.at(r, 2) == p.at(r, 6));
    }
    CHECK(d.received[0] == 1);
    CHECK(d.received[1] == 0);
    CHECK(d.received[2] == 1);

    CHECK(prsg_downsample(p, 1).n_cols == 7);
    CHECK_THROWS_AS(prsg_downsample(p, 0), std::invalid_argument);
}

TEST_CASE("reception mask is seeded and respects the loss rate")
{
    RawSrsGrid g = tiny_grid(1, 273);
    std::mt19937_64 rng(21);

    apply_reception_mask(g, 0.0, rng);
    CHECK(std::accumulate(g.prsg_received.begin(), g.prsg_received.end(), 0) == 137);
    apply_reception_mask(g, 1.0, rng);
    CHECK(std::accumulate(g.prsg_received.begin(), g.prsg_received.end(), 0) == 0);

    int received = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        apply_reception_mask(g, 0.1, rng);
        received += std::accumulate(g.prsg_received.begin(), g.prsg_received.end(), 0);
    }
    double rate = double(received) / (137.0 * trials);
    CHECK(rate == doctest::Approx(0.9).epsilon(0.02));

    std::mt19937_64 a(5), b(5);
    RawSrsGrid ga = tiny_grid(1, 40), gb = tiny_grid(1, 40);
    apply_reception_mask(ga, 0.3, a);
    apply_reception_mask(gb, 0.3, b);
    CHECK(ga.prsg_received == gb.prsg_received);

    CHECK_THROWS_AS(apply_reception_mask(g, -0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(apply_reception_mask(g, 1.5, rng), std::invalid_argument);
}

TEST_CASE("forward fill repeats the last received column")
{
    auto make = [](cdouble v, std::vector<char> received) {
        PrsgGrid g;
        g.n_rows = 2;
        g.n_cols = 3;
        g.values.assign(6, v);
        g.received = std::move(received);
        g.cold.assign(3, 0);
        return g;
    };

    ForwardFiller filler(2, 3);

    PrsgGrid t0 = make(cdouble(1, 1), {1, 1, 0});
    filler.fill(t0);
    CHECK(t0.at(0, 0) == cdouble(1, 1));
    CHECK(t0.at(0, 2) == cdouble(0, 0)); // no history yet
    CHECK(t0.cold[2] == 1);
    CHECK(t0.cold[0] == 0);

    PrsgGrid t1 = make(cdouble(2, 2), {0, 1, 1});
    filler.fill(t1);
    CHECK(t1.at(1, 0) == cdouble(1, 1)); // repeated from t0
    CHECK(t1.at(1, 1) == cdouble(2, 2));
    CHECK(t1.at(1, 2) == cdouble(2, 2)); // first data for this column
    CHECK(t1.cold == std::vector<char>(3, 0));

    PrsgGrid t2 = make(cdouble(3, 3), {0, 0, 0});
    filler.fill(t2);
    CHECK(t2.at(0, 0) == cdouble(1, 1));
    CHECK(t2.at(0, 1) == cdouble(2, 2));
    CHECK(t2.at(0, 2) == cdouble(2, 2));

    // filling a filled grid changes nothing
    PrsgGrid copy = t2;
    filler.fill(t2);
    CHECK(t2.values == copy.values);
    CHECK(t2.received == copy.received);
    CHECK(t2.cold == copy.cold);

    filler.reset();
    PrsgGrid t3 = make(cdouble(9, 9), {0, 0, 0});
    filler.fill(t3);
    CHECK(t3.cold == std::vector<char>(3, 1));
    CHECK(t3.at(0, 0) == cdouble(0, 0));

    PrsgGrid wrong = make(cdouble(1, 0), {1, 1, 1});
    wrong.n_cols = 2;
    wrong.values.resize(4);
    wrong.received.resize(2);
    wrong.cold.resize(2);
    CHECK_THROWS_AS(filler.fill(wrong), std::invalid_argument);
}

TEST_CASE("snapshot assembly averages amplitudes per row")
{
    PrsgGrid g;
    g.n_rows = 2;
    g.n_cols = 3;
    g.values = {cdouble(3, 4), cdouble(0, 2), cdouble(-1, 0),
                cdouble(0, 0), cdouble(6, 8), cdouble(0, -5)};
    g.received = {1, 1, 1};
    g.cold = {0, 0, 0};

    Snapshot snap = assemble_snapshot(g);
    REQUIRE(snap.features.size() == 2);
    CHECK(snap.features[0] == doctest::Approx((5.0 + 2.0 + 1.0) / 3.0));
    CHECK(snap.features[1] == doctest::Approx((0.0 + 10.0 + 5.0) / 3.0));
    CHECK(snap.cold_cols == 0);

    g.received = {1, 0, 1};
    CHECK_THROWS_AS(assemble_snapshot(g), std::invalid_argument);
    g.cold = {0, 1, 0};
    Snapshot with_cold = assemble_snapshot(g);
    CHECK(with_cold.cold_cols == 1);
}

TEST_CASE("snapshot csv round-trips")
{
    std::vector<Snapshot> snaps(3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uni(-10.0, 10.0);
    for (int i = 0; i < 3; ++i) {
        snaps[i].user = i % 2;
        snaps[i].t = 0.02 * i;
        snaps[i].x = uni(rng);
        snaps[i].y = uni(rng);
        snaps[i].heading = std::abs(uni(rng)) * 30.0;
        snaps[i].features.resize(8);
        for (auto& f : snaps[i].features)
            f = std::abs(uni(rng));
    }
    export_snapshots_csv("snaps_roundtrip.csv", snaps);
    auto back = import_snapshots_csv("snaps_roundtrip.csv");
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(back[i].user == snaps[i].user);
        CHECK(back[i].t == doctest::Approx(snaps[i].t).epsilon(1e-9));
        CHECK(back[i].x == doctest::Approx(snaps[i].x).epsilon(1e-9));
        CHECK(back[i].heading == doctest::Approx(snaps[i].heading).epsilon(1e-9));
        REQUIRE(back[i].features.size() == 8);
        for (int k = 0; k < 8; ++k)
            CHECK(back[i].features[k] == doctest::Approx(snaps[i].features[k]).epsilon(1e-9));
    }
}
