#include "bimax/serialize.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bimax {

namespace {

void write_string(std::string &out, const std::string &s) {
    out += Json(s).dump();
}

void write(std::string &out, const Json &j, int indent, int depth) {
    const std::string nl = indent >= 0 ? "\n" : "";
    auto pad = [&](int d) {
        if (indent > 0)
            out.append(static_cast<size_t>(indent * d), ' ');
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{" + nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out += "," + nl;
            first = false;
            pad(depth + 1);
            write_string(out, it.key());
            out += indent >= 0 ? ": " : ":";
            write(out, it.value(), indent, depth + 1);
        }
        out += nl;
        pad(depth);
        out += "}";
        return;
    }
    case Json::value_t::array: {
        out += "[";
        bool first = true;
        for (const auto &e : j) {
            if (!first)
                out += indent >= 0 ? ", " : ",";
            first = false;
            write(out, e, indent, depth + 1);
        }
        out += "]";
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            out += "null";
            return;
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
        // Keep the value a float on re-parse.
        if (std::string(buf).find_first_of(".eEn") == std::string::npos)
            out += ".0";
        return;
    }
    default:
        out += j.dump();
    }
}

double number_or_nan(const Json &j) {
    return j.is_null() ? std::nan("") : j.get<double>();
}

} // namespace

std::string dump_stable(const Json &j, int indent) {
    std::string out;
    write(out, j, indent, 0);
    return out;
}

std::string content_digest(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

Json to_json(const Vector &v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

Json to_json(const Matrix &m) {
    Json a = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

Vector vector_from_json(const Json &j) {
    Vector v(static_cast<Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i)
        v[static_cast<Index>(i)] = j[i].get<double>();
    return v;
}

Matrix matrix_from_json(const Json &j) {
    const Index r = static_cast<Index>(j.size());
    const Index c = r > 0 ? static_cast<Index>(j[0].size()) : 0;
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        if (static_cast<Index>(j[i].size()) != c)
            throw std::invalid_argument("matrix rows have different lengths");
        for (Index k = 0; k < c; ++k)
            m(i, k) = j[i][k].get<double>();
    }
    return m;
}

Json to_json(const ConstrainedKktReport &r) {
    Json j;
    j["stationarity_xy"] = r.stationarity_xy;
    j["stationarity_z1"] = r.stationarity_z1;
    j["z1_infeasibility"] = r.z1_infeasibility;
    j["z1_complementarity"] = r.z1_complementarity;
    j["y1_suboptimality"] = r.y1_suboptimality;
    j["y1_infeasibility"] = r.y1_infeasibility;
    j["y1_complementarity"] = r.y1_complementarity;
    j["lambda"] = to_json(r.lambda);
    j["lambda_bar"] = to_json(r.lambda_bar);
    j["warning"] = r.warning ? Json(*r.warning) : Json(nullptr);
    return j;
}

Json to_json(const KktReport &r) {
    Json j;
    j["primal_block_residual"] = r.primal_block_residual;
    j["x2_residual"] = r.x2_residual;
    j["z1_residual"] = r.z1_residual;
    j["z2_residual"] = r.z2_residual;
    j["dual_block_residual"] = r.dual_block_residual;
    j["feasibility_gap"] = r.feasibility_gap;
    j["feasibility_gap_error"] = r.feasibility_gap_error;
    j["rho_used"] = r.rho_used;
    j["constrained"] = r.constrained ? to_json(*r.constrained) : Json(nullptr);
    return j;
}

KktReport kkt_from_json(const Json &j) {
    KktReport r;
    r.primal_block_residual = number_or_nan(j.at("primal_block_residual"));
    r.x2_residual = number_or_nan(j.at("x2_residual"));
    r.z1_residual = number_or_nan(j.at("z1_residual"));
    r.z2_residual = number_or_nan(j.at("z2_residual"));
    r.dual_block_residual = number_or_nan(j.at("dual_block_residual"));
    r.feasibility_gap = number_or_nan(j.at("feasibility_gap"));
    r.feasibility_gap_error = number_or_nan(j.at("feasibility_gap_error"));
    r.rho_used = number_or_nan(j.at("rho_used"));
    if (j.contains("constrained") && !j["constrained"].is_null()) {
        const Json &c = j["constrained"];
        ConstrainedKktReport k;
        k.stationarity_xy = number_or_nan(c.at("stationarity_xy"));
        k.stationarity_z1 = number_or_nan(c.at("stationarity_z1"));
        k.z1_infeasibility = number_or_nan(c.at("z1_infeasibility"));
        k.z1_complementarity = number_or_nan(c.at("z1_complementarity"));
        k.y1_suboptimality = number_or_nan(c.at("y1_suboptimality"));
        k.y1_infeasibility = number_or_nan(c.at("y1_infeasibility"));
        k.y1_complementarity = number_or_nan(c.at("y1_complementarity"));
        k.lambda = vector_from_json(c.at("lambda"));
        k.lambda_bar = vector_from_json(c.at("lambda_bar"));
        if (!c.at("warning").is_null())
            k.warning = c["warning"].get<std::string>();
        r.constrained = k;
    }
    return r;
}

Json to_json(const TraceRecord &r) {
    Json j;
    j["outer_k"] = r.outer_k;
    j["oracle_calls_total"] = r.oracle_calls_total;
    j["oracle_calls_f1"] = r.oracle_calls_f1;
    j["oracle_calls_ftilde1"] = r.oracle_calls_ftilde1;
    j["inner_steps"] = r.inner_steps;
    j["upper_objective"] = r.upper_objective;
    j["lower_optimality_gap"] = r.lower_optimality_gap;
    j["infeasibility"] = r.infeasibility;
    j["infeasibility_raw"] = r.infeasibility_raw;
    j["eps_k"] = r.eps_k;
    j["primal_step_norm"] = r.primal_step_norm;
    j["wall_ms"] = r.wall_ms;
    if (r.kkt)
        j["kkt"] = to_json(*r.kkt);
    if (r.max_dual_penalty)
        j["max_dual_penalty"] = *r.max_dual_penalty;
    return j;
}

TraceRecord trace_record_from_json(const Json &j) {
    TraceRecord r;
    r.outer_k = j.at("outer_k").get<std::int64_t>();
    r.oracle_calls_total = j.at("oracle_calls_total").get<std::int64_t>();
    r.oracle_calls_f1 = j.at("oracle_calls_f1").get<std::int64_t>();
    r.oracle_calls_ftilde1 = j.at("oracle_calls_ftilde1").get<std::int64_t>();
    r.inner_steps = j.at("inner_steps").get<std::int64_t>();
    r.upper_objective = number_or_nan(j.at("upper_objective"));
    r.lower_optimality_gap = number_or_nan(j.at("lower_optimality_gap"));
    r.infeasibility = number_or_nan(j.at("infeasibility"));
    r.infeasibility_raw = number_or_nan(j.at("infeasibility_raw"));
    r.eps_k = number_or_nan(j.at("eps_k"));
    r.primal_step_norm = number_or_nan(j.at("primal_step_norm"));
    r.wall_ms = j.at("wall_ms").get<std::int64_t>();
    if (j.contains("kkt"))
        r.kkt = kkt_from_json(j["kkt"]);
    if (j.contains("max_dual_penalty"))
        r.max_dual_penalty = number_or_nan(j["max_dual_penalty"]);
    return r;
}

Json to_json(const LinearInstance &inst) {
    Json j;
    j["family"] = "linear";
    j["seed"] = inst.seed;
    j["dims"] = {{"n", inst.n}, {"m", inst.m}, {"l", inst.l}};
    j["c"] = to_json(inst.c);
    j["d"] = to_json(inst.d);
    j["d_tilde"] = to_json(inst.d_tilde);
    j["A_tilde"] = to_json(inst.A_tilde);
    j["B_tilde"] = to_json(inst.B_tilde);
    j["b_tilde"] = to_json(inst.b_tilde);
    j["y_hat"] = to_json(inst.y_hat);
    j["multipliers"] = to_json(inst.multipliers);
    Json act = Json::array();
    for (Index i : inst.active_set)
        act.push_back(i);
    j["active_set"] = act;
    j["constants"] = {{"B_dual", inst.B_dual}};
    j["metadata"] = {{"normal_parameter", "standard deviation"},
                     {"matrix_sd", 0.01},
                     {"y_hat_sd", 0.1},
                     {"attempts", inst.attempts}};
    return j;
}

LinearInstance linear_from_json(const Json &j) {
    if (j.at("family") != "linear")
        throw std::invalid_argument("not a linear instance");
    LinearInstance inst;
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.n = j.at("dims").at("n").get<Index>();
    inst.m = j.at("dims").at("m").get<Index>();
    inst.l = j.at("dims").at("l").get<Index>();
    inst.c = vector_from_json(j.at("c"));
    inst.d = vector_from_json(j.at("d"));
    inst.d_tilde = vector_from_json(j.at("d_tilde"));
    inst.A_tilde = matrix_from_json(j.at("A_tilde"));
    inst.B_tilde = matrix_from_json(j.at("B_tilde"));
    inst.b_tilde = vector_from_json(j.at("b_tilde"));
    inst.y_hat = vector_from_json(j.at("y_hat"));
    inst.multipliers = vector_from_json(j.at("multipliers"));
    for (const auto &i : j.at("active_set"))
        inst.active_set.push_back(i.get<Index>());
    inst.B_dual = j.at("constants").at("B_dual").get<double>();
    inst.attempts = j.at("metadata").value("attempts", 1);
    if (inst.c.size() != inst.n || inst.d.size() != inst.m || inst.d_tilde.size() != inst.m ||
        inst.A_tilde.rows() != inst.l || inst.A_tilde.cols() != inst.n ||
        inst.B_tilde.rows() != inst.l || inst.B_tilde.cols() != inst.m ||
        inst.b_tilde.size() != inst.l)
        throw std::invalid_argument("linear instance arrays do not match dims");
    return inst;
}

Json to_json(const DroConfig &c) {
    Json j;
    j["groups"] = c.groups;
    j["n_train"] = c.n_train;
    j["n_val"] = c.n_val;
    j["minority"] = c.minority;
    j["input_dim"] = c.input_dim;
    j["encoder_dim"] = c.encoder_dim;
    j["ridge"] = c.ridge;
    j["cap"] = c.cap;
    j["minibatch"] = c.minibatch;
    j["eta_min"] = c.eta_min;
    j["eta_max"] = c.eta_max;
    j["encoder_bound"] = c.encoder_bound;
    j["head_bound"] = c.head_bound;
    j["core_signal"] = c.core_signal;
    j["core_noise"] = c.core_noise;
    j["spurious_signal"] = c.spurious_signal;
    j["spurious_noise"] = c.spurious_noise;
    j["seed"] = c.seed;
    return j;
}

DroConfig dro_config_from_json(const Json &j) {
    DroConfig c;
    c.groups = j.at("groups").get<int>();
    c.n_train = j.at("n_train").get<Index>();
    c.n_val = j.at("n_val").get<Index>();
    c.minority = j.at("minority").get<double>();
    c.input_dim = j.at("input_dim").get<Index>();
    c.encoder_dim = j.at("encoder_dim").get<Index>();
    c.ridge = j.at("ridge").get<double>();
    c.cap = j.at("cap").get<double>();
    c.minibatch = j.at("minibatch").get<Index>();
    c.eta_min = j.at("eta_min").get<double>();
    c.eta_max = j.at("eta_max").get<double>();
    c.encoder_bound = j.at("encoder_bound").get<double>();
    c.head_bound = j.at("head_bound").get<double>();
    c.core_signal = j.at("core_signal").get<double>();
    c.core_noise = j.at("core_noise").get<double>();
    c.spurious_signal = j.at("spurious_signal").get<double>();
    c.spurious_noise = j.at("spurious_noise").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

Json result_to_json(const SolveResult &res) {
    Json j;
    j["terminated_by"] = to_string(res.terminated_by);
    j["outer_iterations"] = res.outer_iterations;
    j["oracle_calls"] = {{"total", res.oracle.total()},
                         {"f1", res.oracle.calls_f1},
                         {"ftilde1", res.oracle.calls_ftilde1}};
    j["rho"] = res.rho;
    j["eps_hat"] = res.eps_hat;
    j["L_grad_P1"] = res.L_grad_P1;
    j["D2"] = res.D2;
    j["initial_gap"] = res.initial_gap;
    j["checkpoint_growth_bound"] = res.checkpoint_growth_bound;
    j["K"] = res.K;
    j["sampled_k"] = res.sampled_k ? Json(*res.sampled_k) : Json(nullptr);
    j["f0_max_estimate"] = res.f0_max_estimate ? Json(*res.f0_max_estimate) : Json(nullptr);
    j["sapd_T_clamped"] = res.sapd_T_clamped;
    j["primal"] = to_json(res.primal);
    j["dual"] = to_json(res.dual);
    j["kkt"] = to_json(res.kkt);
    if (!res.trace.empty()) {
        const TraceRecord &last = res.trace.back();
        j["final"] = {{"upper_objective", last.upper_objective},
                      {"lower_optimality_gap", last.lower_optimality_gap},
                      {"infeasibility", last.infeasibility},
                      {"infeasibility_raw", last.infeasibility_raw}};
    }
    Json notes = Json::array();
    for (const auto &n : res.notes)
        notes.push_back(n);
    j["notes"] = notes;
    return j;
}

} // namespace bimax
