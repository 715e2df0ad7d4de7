#include <json.hpp>

#include "chains/errors.hpp"
#include "chains/kernels.hpp"

// JSON schema for kernel specs; see docs/formats.md. The "family" field
// discriminates; optional fields fall back to the struct defaults.

namespace chains {

namespace {

using nlohmann::json;

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidParams(std::string("bad value for '") + key + "'");
    }
}

MSequence m_from_json(const json& j) {
    MSequence m;
    const std::string kind = field_or<std::string>(j, "kind", "odd");
    if (kind == "odd")
        m.kind = MSequence::Kind::odd;
    else if (kind == "explicit")
        m.kind = MSequence::Kind::explicit_list;
    else if (kind == "geometric")
        m.kind = MSequence::Kind::geometric;
    else if (kind == "superexp")
        m.kind = MSequence::Kind::superexp;
    else
        throw InvalidParams("unknown window sequence kind: " + kind);
    m.values = field_or<std::vector<std::uint64_t>>(j, "values", {});
    m.base = field_or<std::uint64_t>(j, "base", m.base);
    m.factor = field_or<double>(j, "factor", m.factor);
    return m;
}

json m_to_json(const MSequence& m) {
    json j;
    switch (m.kind) {
        case MSequence::Kind::odd: j["kind"] = "odd"; break;
        case MSequence::Kind::explicit_list:
            j["kind"] = "explicit";
            j["values"] = m.values;
            break;
        case MSequence::Kind::geometric:
            j["kind"] = "geometric";
            j["base"] = m.base;
            j["factor"] = m.factor;
            break;
        case MSequence::Kind::superexp:
            j["kind"] = "superexp";
            j["base"] = m.base;
            j["factor"] = m.factor;
            break;
    }
    return j;
}

XiSequence xi_from_json(const json& j) {
    XiSequence xi;
    const std::string kind = field_or<std::string>(j, "kind", "geometric");
    if (kind == "geometric")
        xi.kind = XiSequence::Kind::geometric;
    else if (kind == "power_law")
        xi.kind = XiSequence::Kind::power_law;
    else
        throw InvalidParams("unknown coefficient kind: " + kind);
    xi.c = field_or<double>(j, "c", xi.c);
    xi.rho = field_or<double>(j, "rho", xi.rho);
    xi.alpha = field_or<double>(j, "alpha", xi.alpha);
    return xi;
}

json xi_to_json(const XiSequence& xi) {
    json j;
    j["c"] = xi.c;
    if (xi.kind == XiSequence::Kind::geometric) {
        j["kind"] = "geometric";
        j["rho"] = xi.rho;
    } else {
        j["kind"] = "power_law";
        j["alpha"] = xi.alpha;
    }
    return j;
}

PSequence p_from_json(const json& j) {
    PSequence p;
    const std::string kind = field_or<std::string>(j, "kind", "constant");
    if (kind == "harmonic") {
        p.kind = PSequence::Kind::harmonic;
        p.a = field_or<double>(j, "a", p.a);
        p.b = field_or<double>(j, "b", p.b);
        p.cap = field_or<double>(j, "cap", p.cap);
    } else if (kind == "geometric") {
        p.kind = PSequence::Kind::geometric;
        p.base = field_or<double>(j, "base", p.base);
        p.ratio = field_or<double>(j, "ratio", p.ratio);
        p.floor_ = field_or<double>(j, "floor", p.floor_);
    } else if (kind == "constant") {
        p.kind = PSequence::Kind::constant;
        p.value_ = field_or<double>(j, "value", p.value_);
    } else if (kind == "explicit") {
        p.kind = PSequence::Kind::explicit_list;
        p.values = field_or<std::vector<double>>(j, "values", {});
        p.tail = field_or<double>(j, "tail", p.tail);
    } else {
        throw InvalidParams("unknown stopping sequence kind: " + kind);
    }
    return p;
}

json p_to_json(const PSequence& p) {
    json j;
    switch (p.kind) {
        case PSequence::Kind::harmonic:
            j["kind"] = "harmonic";
            j["a"] = p.a;
            j["b"] = p.b;
            j["cap"] = p.cap;
            break;
        case PSequence::Kind::geometric:
            j["kind"] = "geometric";
            j["base"] = p.base;
            j["ratio"] = p.ratio;
            j["floor"] = p.floor_;
            break;
        case PSequence::Kind::constant:
            j["kind"] = "constant";
            j["value"] = p.value_;
            break;
        case PSequence::Kind::explicit_list:
            j["kind"] = "explicit";
            j["values"] = p.values;
            j["tail"] = p.tail;
            break;
    }
    return j;
}

}  // namespace

KernelSpec kernel_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidParams(std::string("kernel JSON parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("family"))
        throw InvalidParams("kernel JSON needs a 'family' field");
    const std::string family = j.at("family").get<std::string>();
    if (family == "bk") {
        BkSpec spec;
        spec.epsilon = field_or<double>(j, "epsilon", spec.epsilon);
        spec.r = field_or<double>(j, "r", spec.r);
        if (j.contains("m")) spec.m = m_from_json(j.at("m"));
        spec.truncation_depth = field_or<int>(j, "truncation_depth", spec.truncation_depth);
        return spec;
    }
    if (family == "binary_autoregressive") {
        AutoregressiveSpec spec;
        if (j.contains("xi")) spec.xi = xi_from_json(j.at("xi"));
        spec.gamma = field_or<double>(j, "gamma", spec.gamma);
        return spec;
    }
    if (family == "renewal_ell") {
        RenewalSpec spec;
        if (j.contains("p")) spec.p = p_from_json(j.at("p"));
        return spec;
    }
    if (family == "finite_markov") {
        MarkovSpec spec;
        spec.order = field_or<int>(j, "order", spec.order);
        spec.alphabet = field_or<int>(j, "alphabet", spec.alphabet);
        spec.rows = field_or<std::vector<std::vector<double>>>(j, "rows", {});
        return spec;
    }
    throw InvalidParams("unknown kernel family: " + family);
}

std::string kernel_spec_to_json(const KernelSpec& spec) {
    json j;
    if (const auto* bk = std::get_if<BkSpec>(&spec)) {
        j["family"] = "bk";
        j["epsilon"] = bk->epsilon;
        j["r"] = bk->r;
        j["m"] = m_to_json(bk->m);
        j["truncation_depth"] = bk->truncation_depth;
    } else if (const auto* ar = std::get_if<AutoregressiveSpec>(&spec)) {
        j["family"] = "binary_autoregressive";
        j["xi"] = xi_to_json(ar->xi);
        j["gamma"] = ar->gamma;
    } else if (const auto* rs = std::get_if<RenewalSpec>(&spec)) {
        j["family"] = "renewal_ell";
        j["p"] = p_to_json(rs->p);
    } else {
        const auto& ms = std::get<MarkovSpec>(spec);
        j["family"] = "finite_markov";
        j["order"] = ms.order;
        j["alphabet"] = ms.alphabet;
        j["rows"] = ms.rows;
    }
    return j.dump(2);
}

}  // namespace chains
