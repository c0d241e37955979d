#pragma once

#include <string>

#include <json.hpp>

#include "bimax/dro.hpp"
#include "bimax/driver.hpp"
#include "bimax/instances.hpp"
#include "bimax/kkt.hpp"
#include "bimax/trace.hpp"

namespace bimax {

using Json = nlohmann::ordered_json;

/// Compact JSON with every floating-point number printed with 17 significant digits and
/// non-finite numbers as null.
std::string dump_stable(const Json &j, int indent = -1);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string content_digest(const std::string &bytes);

Json to_json(const Vector &v);
Json to_json(const Matrix &m);
Vector vector_from_json(const Json &j);
Matrix matrix_from_json(const Json &j);

Json to_json(const ConstrainedKktReport &r);
Json to_json(const KktReport &r);
KktReport kkt_from_json(const Json &j);

Json to_json(const TraceRecord &r);
TraceRecord trace_record_from_json(const Json &j);

Json to_json(const LinearInstance &inst);
LinearInstance linear_from_json(const Json &j);

Json to_json(const DroConfig &cfg);
DroConfig dro_config_from_json(const Json &j);

/// Summary of a finished run, without wall-clock data.
Json result_to_json(const SolveResult &res);

} // namespace bimax
