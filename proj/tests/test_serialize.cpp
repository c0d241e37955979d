#include <doctest.h>

#include <cmath>

#include "bimax/dro.hpp"
#include "bimax/instances.hpp"
#include "bimax/serialize.hpp"

using namespace bimax;

TEST_SUITE("serialize") {

TEST_CASE("digest is 64-bit FNV-1a") {
    CHECK(content_digest("") == "cbf29ce484222325");
    CHECK(content_digest("a") == "af63dc4c8601ec8c");
    CHECK(content_digest("foobar") == "85944171f73967e8");
}

TEST_CASE("stable dump") {
    Json j;
    j["a"] = 0.1;
    j["b"] = 1.0;
    j["c"] = NAN;
    j["d"] = 3;
    CHECK(dump_stable(j) == R"({"a":0.10000000000000001,"b":1.0,"c":null,"d":3})");
    CHECK(Json::parse(dump_stable(j))["a"].get<double>() == 0.1);
}

TEST_CASE("vectors and matrices round trip exactly") {
    Vector v(3);
    v << 1.0 / 3, -2e-300, 7;
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6.5;
    CHECK(vector_from_json(Json::parse(dump_stable(to_json(v)))) == v);
    CHECK(matrix_from_json(Json::parse(dump_stable(to_json(m)))) == m);
}

TEST_CASE("trace records round trip") {
    TraceRecord r;
    r.outer_k = 4;
    r.oracle_calls_total = 120;
    r.oracle_calls_f1 = 40;
    r.oracle_calls_ftilde1 = 80;
    r.upper_objective = 0.123456789012345;
    r.lower_optimality_gap = 1e-9;
    r.infeasibility = NAN;
    r.eps_k = 0.01;
    KktReport k;
    k.primal_block_residual = 0.5;
    k.feasibility_gap = 2;
    r.kkt = k;
    const auto back = trace_record_from_json(Json::parse(dump_stable(to_json(r))));
    CHECK(back.outer_k == 4);
    CHECK(back.oracle_calls_ftilde1 == 80);
    CHECK(back.upper_objective == r.upper_objective);
    CHECK(std::isnan(back.infeasibility));
    REQUIRE(back.kkt);
    CHECK(back.kkt->primal_block_residual == 0.5);
    CHECK_FALSE(back.max_dual_penalty);
}

TEST_CASE("linear instances round trip") {
    const auto inst = gen_linear(4, 3, 2, 8);
    const auto back = linear_from_json(Json::parse(dump_stable(to_json(inst))));
    CHECK(back.c == inst.c);
    CHECK(back.A_tilde == inst.A_tilde);
    CHECK(back.b_tilde == inst.b_tilde);
    CHECK(back.multipliers == inst.multipliers);
    CHECK(back.active_set == inst.active_set);
    CHECK(back.B_dual == inst.B_dual);
    CHECK(dump_stable(to_json(back)) == dump_stable(to_json(inst)));
}

TEST_CASE("dro configs round trip") {
    DroConfig cfg;
    cfg.groups = 6;
    cfg.minority = 0.05;
    cfg.seed = 77;
    const auto back = dro_config_from_json(Json::parse(dump_stable(to_json(cfg))));
    CHECK(back.groups == 6);
    CHECK(back.minority == 0.05);
    CHECK(back.seed == 77);
    CHECK(dump_stable(to_json(back)) == dump_stable(to_json(cfg)));
}

}
