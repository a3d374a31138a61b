#include <doctest.h>

#include "hybridfv/solver.hpp"
#include "hybridfv/surrogate.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace hybridfv;
using namespace hybridfv::testhelpers;

namespace {

void zero_parameters(SurrogateModel& model) {
    for (const TensorRef& r : model.tensors()) {
        if (r.role != TensorRole::Parameter) continue;
        if (r.name.find(".gamma") != std::string::npos) continue;
        for (double& v : *r.value) v = 0.0;
    }
}

SurrogateModel tiny_model(const CaseSetup& setup, ModelKind kind = ModelKind::Dense,
                          std::size_t width = 8) {
    ModelShape shape = setup.model_shape;
    shape.kind = kind;
    shape.hidden_width = width;
    return SurrogateModel(shape, setup.grid, setup.boundaries, setup.physics.dt,
                          setup.seed);
}

}  // namespace

TEST_CASE("feature vector lengths follow the stencil layout") {
    CHECK(stencil_size(2) == 5);
    CHECK(stencil_size(3) == 7);
    CHECK(surrogate_variables(2).size() == 3);
    CHECK(surrogate_variables(3).size() == 4);
    ModelShape s2;
    CHECK(s2.feature_len() == 15);
    ModelShape s3;
    s3.axes = 3;
    CHECK(s3.feature_len() == 28);
}

TEST_CASE("normalization round-trips") {
    NormStats stats;
    stats.per_var = {{-2.0, 3.0}, {0.0, 0.0}, {288.15, 307.75}};
    for (double x : {-2.0, 0.4, 3.0}) {
        const double n = stats.normalize(0, x);
        CHECK(stats.per_var[0].min + n * stats.per_var[0].scale() ==
              doctest::Approx(x).epsilon(1e-12));
    }
    // degenerate range falls back to unit scale
    CHECK(stats.per_var[1].scale() == 1.0);
    CHECK(stats.denormalize_delta(2, 1.0) ==
          doctest::Approx(307.75 - 288.15).epsilon(1e-12));
}

TEST_CASE("stencil features: uniform fields give identical rows") {
    const StructuredGrid g = make_grid({4, 4}, {1, 1});
    const BoundarySpec bcs = cavity_boundaries(1.0, 1.0, 2);
    FieldState s = make_state(g);
    s.T.assign(g.cell_count(), 1.0);  // matches both walls
    NormStats stats;
    stats.per_var = {{-1, 1}, {-1, 1}, {0, 2}};
    const Matrix f = build_stencil_features(g, s, bcs, stats);
    REQUIRE(f.cols == 15);
    for (std::size_t r = 0; r < f.rows; ++r)
        for (std::size_t c = 0; c < f.cols; ++c)
            CHECK(f.at(r, c) == doctest::Approx(f.at(0, c)).epsilon(1e-14));
    // u blocks are normalized zeros, T block is the normalized constant
    CHECK(f.at(0, 0) == doctest::Approx(0.5));
    CHECK(f.at(0, 10) == doctest::Approx(0.5));
}

TEST_CASE("stencil features gather neighbors into the fixed slot order") {
    const StructuredGrid g = make_grid({3, 3}, {1, 1});
    BoundarySpec bcs;
    for (int c = 0; c < 3; ++c) bcs.velocity[c] = uniform_dirichlet(0.0);
    bcs.temperature = all_neumann();
    FieldState s = make_state(g);
    const double hot = 9.0;
    s.T[g.cell_index(1, 1)] = hot;  // single hot cell at the center
    NormStats stats;
    stats.per_var = {{0, 1}, {0, 1}, {0, 9}};
    const Matrix f = build_stencil_features(g, s, bcs, stats);
    const std::size_t tbase = 2 * 5;
    // center cell carries it in slot 0 of the T block
    CHECK(f.at(g.cell_index(1, 1), tbase + 0) == doctest::Approx(1.0));
    // the -x neighbor of (2,1) is the hot cell
    CHECK(f.at(g.cell_index(2, 1), tbase + 1) == doctest::Approx(1.0));
    CHECK(f.at(g.cell_index(0, 1), tbase + 2) == doctest::Approx(1.0));  // +x
    CHECK(f.at(g.cell_index(1, 2), tbase + 3) == doctest::Approx(1.0));  // -y
    CHECK(f.at(g.cell_index(1, 0), tbase + 4) == doctest::Approx(1.0));  // +y
}

TEST_CASE("cells beside the hot wall see its normalized value in the -x slot") {
    CaseSetup setup = desk_case(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    NormStats stats;
    stats.per_var = {{-1, 1}, {-1, 1}, {288.15, 307.75}};
    const Matrix f =
        build_stencil_features(setup.grid, s, setup.boundaries, stats);
    const std::size_t tbase = 2 * 5;
    const double want = (307.75 - 288.15) / (307.75 - 288.15);  // = 1
    for (int j = 0; j < setup.grid.dims[1]; ++j)
        CHECK(f.at(setup.grid.cell_index(0, j), tbase + 1) ==
              doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("a zero model predicts the frozen state") {
    CaseSetup setup = desk_case(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    auto burst = solver.run_burst(s, 3);

    SurrogateModel model = tiny_model(setup);
    model.fit_normalization(burst);
    zero_parameters(model);
    const FieldState next = model.predict_next_state(s);
    CHECK(next.T == s.T);
    CHECK(next.u[0] == s.u[0]);
    CHECK(next.p == s.p);
    CHECK(next.time == doctest::Approx(s.time + setup.physics.dt));
}

TEST_CASE("training memorizes a two-pair dataset") {
    CaseSetup setup = desk_case(8, 0.02);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    const auto burst = solver.run_burst(s, 10);
    const std::vector<FieldState> buffer(burst.end() - 3, burst.end());

    SurrogateModel model = tiny_model(setup, ModelKind::Dense, 24);
    model.fit_normalization(buffer);
    const TrainReport report = model.train(buffer, 150, false);
    CHECK(report.pairs_used == 2);
    CHECK(report.epochs_run == 150);
    CHECK(report.best_val_loss < report.initial_val_loss);
    CHECK(report.best_val_loss < 0.25 * report.initial_val_loss);
}

TEST_CASE("zero training epochs leave the model bitwise unchanged") {
    CaseSetup setup = desk_case(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    const auto burst = solver.run_burst(s, 4);
    const std::vector<FieldState> buffer(burst.end() - 3, burst.end());

    SurrogateModel model = tiny_model(setup);
    model.fit_normalization(buffer);
    std::vector<std::vector<double>> before;
    for (const TensorRef& r : model.tensors()) before.push_back(*r.value);
    const TrainReport report = model.train(buffer, 0, false);
    CHECK(report.epochs_run == 0);
    std::size_t i = 0;
    for (const TensorRef& r : model.tensors()) CHECK(*r.value == before[i++]);
}

TEST_CASE("best checkpoint never loses to the starting weights") {
    CaseSetup setup = desk_case(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    const auto burst = solver.run_burst(s, 6);
    const std::vector<FieldState> buffer(burst.end() - 3, burst.end());

    SurrogateModel model = tiny_model(setup);
    model.fit_normalization(buffer);
    const TrainReport r2 = model.train(buffer, 2, false);
    CHECK(r2.best_val_loss <= r2.initial_val_loss);
}

TEST_CASE("train requires at least two snapshots") {
    CaseSetup setup = desk_case(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    SurrogateModel model = tiny_model(setup);
    model.fit_normalization({s});
    CHECK_THROWS(model.train({s}, 1, false));
}

TEST_CASE("transfer learning keeps the first layer bitwise constant") {
    CaseSetup setup = desk_case(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    const auto burst = solver.run_burst(s, 6);
    const std::vector<FieldState> buffer(burst.end() - 3, burst.end());

    for (ModelKind kind : {ModelKind::Dense, ModelKind::Spectral}) {
        SurrogateModel model = tiny_model(setup, kind, 6);
        model.fit_normalization(buffer);
        std::vector<std::vector<double>> first_before;
        for (const TensorRef& r : model.tensors())
            if (r.name.find(".l1.") != std::string::npos ||
                r.name.find(".lift.") != std::string::npos)
                first_before.push_back(*r.value);
        REQUIRE(!first_before.empty());
        model.train(buffer, 3, true);
        std::size_t i = 0;
        bool others_changed = false;
        for (const TensorRef& r : model.tensors()) {
            if (r.name.find(".l1.") != std::string::npos ||
                r.name.find(".lift.") != std::string::npos) {
                CHECK(*r.value == first_before[i++]);
            } else if (r.role == TensorRole::Parameter) {
                // at least something else moved
                others_changed = true;
            }
        }
        CHECK(others_changed);
    }
}

TEST_CASE("loss and grads vanish when predictions equal targets") {
    CaseSetup setup = desk_case(8);
    SurrogateModel model = tiny_model(setup);
    NormStats stats;
    stats.per_var = {{-1, 1}, {-1, 1}, {288.15, 307.75}};
    model.stats() = stats;
    zero_parameters(model);

    Matrix feats(10, model.shape().feature_len());
    for (std::size_t i = 0; i < feats.data.size(); ++i)
        feats.data[i] = 0.01 * static_cast<double>(i % 7);
    const std::vector<Field> targets(3, Field(10, 0.0));
    const double loss = model.loss_and_grads(feats, targets, true);
    CHECK(loss == 0.0);
    for (const TensorRef& r : model.tensors()) {
        if (r.role != TensorRole::Parameter) continue;
        for (double gv : *r.grad) CHECK(gv == 0.0);
    }
}

TEST_CASE("checkpoints round-trip bitwise and reject corruption") {
    CaseSetup setup = desk_case(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    const auto burst = solver.run_burst(s, 5);
    const std::vector<FieldState> buffer(burst.end() - 3, burst.end());

    for (ModelKind kind : {ModelKind::Dense, ModelKind::Spectral}) {
        SurrogateModel model = tiny_model(setup, kind, 6);
        model.fit_normalization(buffer);
        model.train(buffer, 2, false);

        const std::string path = "ckpt_test.bin";
        save_checkpoint(model, path);
        SurrogateModel loaded = load_checkpoint(path, setup.grid,
                                                setup.boundaries,
                                                setup.physics.dt);
        auto want = model.tensors();
        auto got = loaded.tensors();
        REQUIRE(want.size() == got.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(want[i].name == got[i].name);
            CHECK(*want[i].value == *got[i].value);
        }
        const FieldState p1 = model.predict_next_state(s);
        const FieldState p2 = loaded.predict_next_state(s);
        CHECK(p1.T == p2.T);
        CHECK(p1.u[0] == p2.u[0]);

        // corrupt the magic
        {
            std::FILE* f = std::fopen(path.c_str(), "r+b");
            REQUIRE(f);
            std::fputc('Z', f);
            std::fclose(f);
        }
        CHECK_THROWS(load_checkpoint(path, setup.grid, setup.boundaries,
                                     setup.physics.dt));
        // rewrite, then truncate the payload
        save_checkpoint(model, path);
        std::filesystem::resize_file(path,
                                     std::filesystem::file_size(path) - 16);
        CHECK_THROWS(load_checkpoint(path, setup.grid, setup.boundaries,
                                     setup.physics.dt));
        std::filesystem::remove(path);
    }
}

TEST_CASE("combined-loss gradients match finite differences on a tiny model") {
    CaseSetup setup = desk_case(4);
    ModelShape shape = setup.model_shape;
    shape.hidden_width = 4;
    shape.dropout = 0.0;
    SurrogateModel model(shape, setup.grid, setup.boundaries, setup.physics.dt,
                         3);
    NormStats stats;
    stats.per_var = {{-1, 1}, {-1, 1}, {288.15, 307.75}};
    model.stats() = stats;

    Matrix feats(5, shape.feature_len());
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (double& v : feats.data) v = dist(rng);
    std::vector<Field> targets(3, Field(5));
    for (auto& t : targets)
        for (double& v : t) v = dist(rng);

    (void)model.loss_and_grads(feats, targets, true);
    std::vector<std::vector<double>> analytic;
    for (const TensorRef& r : model.tensors())
        analytic.push_back(r.role == TensorRole::Parameter ? *r.grad
                                                           : std::vector<double>{});

    const double h = 1e-6, rtol = 1e-5, atol = 1e-7;
    std::size_t t = 0;
    for (const TensorRef& r : model.tensors()) {
        if (r.role != TensorRole::Parameter) {
            ++t;
            continue;
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < r.value->size(); ++i) {
            const double saved = (*r.value)[i];
            (*r.value)[i] = saved + h;
            const double lp = model.loss_and_grads(feats, targets, true);
            (*r.value)[i] = saved - h;
            const double lm = model.loss_and_grads(feats, targets, true);
            (*r.value)[i] = saved;
            const double fd = (lp - lm) / (2 * h);
            const double an = analytic[t][i];
            const double excess = std::abs(fd - an) - atol;
            worst = std::max(worst, excess <= 0
                                        ? 0.0
                                        : excess / std::max({std::abs(fd),
                                                             std::abs(an), atol}));
        }
        INFO("tensor ", r.name);
        CHECK(worst < rtol);
        ++t;
    }
}
