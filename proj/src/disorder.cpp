#include "taseplab/disorder.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "taseplab/errors.hpp"
#include "taseplab/rng.hpp"

namespace taseplab {

namespace {
// Substream tags so the defect indicator and the Q draw at the same site
// do not share bits.
constexpr std::uint64_t kDefectStream = 0x64656665637431ULL;
constexpr std::uint64_t kValueStream = 0x5176616c756531ULL;
} // namespace

void DisorderSpec::validate() const {
    if (!(r > 0.0 && r < 1.0)) throw validation_error("DisorderSpec.r must lie in (0,1)");
    if (!(R >= r && R < 1.0)) throw validation_error("DisorderSpec.R must satisfy r <= R < 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw validation_error("DisorderSpec.epsilon must lie in [0,1]");
    if (q_kind == QKind::power_tail && !(kappa > 1.0))
        throw validation_error("DisorderSpec.kappa must exceed 1 for power_tail");
}

double DisorderSpec::rate(std::int64_t x) const {
    const auto ux = static_cast<std::uint64_t>(x);
    const double u_def = bits_to_unit_open(mix3(seed, kDefectStream, ux));
    if (u_def > epsilon) return 1.0; // epsilon=1 -> always defect, epsilon=0 -> never
    const double u = bits_to_unit_open(mix3(seed, kValueStream, ux));
    switch (q_kind) {
        case QKind::point_mass_at_r:
            return r;
        case QKind::uniform_on_r_R:
            return r + u * (R - r);
        case QKind::power_tail:
            // CDF ((v-r)/(R-r))^kappa on [r,R]; mass near r scales like u^kappa
            return r + (R - r) * std::pow(u, 1.0 / kappa);
    }
    return 1.0;
}

const char* q_kind_name(QKind k) {
    switch (k) {
        case QKind::point_mass_at_r: return "point_mass_at_r";
        case QKind::uniform_on_r_R: return "uniform_on_r_R";
        case QKind::power_tail: return "power_tail";
    }
    return "?";
}

std::string DisorderSpec::to_json() const {
    nlohmann::json j;
    j["r"] = r;
    j["R"] = R;
    j["epsilon"] = epsilon;
    j["q_kind"] = q_kind_name(q_kind);
    if (q_kind == QKind::power_tail) j["kappa"] = kappa;
    j["seed"] = seed;
    return j.dump();
}

DisorderSpec DisorderSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(std::string("DisorderSpec: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw validation_error("DisorderSpec: expected a JSON object");

    DisorderSpec spec;
    bool has_kappa = false;
    for (const auto& [key, value] : j.items()) {
        if (key == "r") spec.r = value.get<double>();
        else if (key == "R") spec.R = value.get<double>();
        else if (key == "epsilon") spec.epsilon = value.get<double>();
        else if (key == "seed") spec.seed = value.get<std::uint64_t>();
        else if (key == "kappa") { spec.kappa = value.get<double>(); has_kappa = true; }
        else if (key == "q_kind") {
            const std::string name = value.get<std::string>();
            if (name == "point_mass_at_r") spec.q_kind = QKind::point_mass_at_r;
            else if (name == "uniform_on_r_R") spec.q_kind = QKind::uniform_on_r_R;
            else if (name == "power_tail") spec.q_kind = QKind::power_tail;
            else throw validation_error("DisorderSpec.q_kind: unknown value '" + name + "'");
        } else {
            throw validation_error("DisorderSpec: unknown key '" + key + "'");
        }
    }
    if (has_kappa && spec.q_kind != QKind::power_tail)
        throw validation_error("DisorderSpec.kappa only applies to q_kind=power_tail");
    spec.validate();
    return spec;
}

double Environment::min_rate() const {
    return *std::min_element(rates.begin(), rates.end());
}

Environment sample_environment(const DisorderSpec& spec, Interval window) {
    spec.validate();
    if (window.length() <= 0) throw validation_error("sample_environment: empty window");
    Environment env;
    env.window = window;
    env.rates.resize(static_cast<std::size_t>(window.length()));
    for (std::int64_t x = window.lo; x <= window.hi; ++x)
        env.rates[static_cast<std::size_t>(x - window.lo)] = spec.rate(x);
    return env;
}

Environment make_environment(Interval window, std::vector<double> rates) {
    if (window.length() != static_cast<std::int64_t>(rates.size()))
        throw validation_error("make_environment: window/rates length mismatch");
    Environment env;
    env.window = window;
    env.rates = std::move(rates);
    return env;
}

} // namespace taseplab
