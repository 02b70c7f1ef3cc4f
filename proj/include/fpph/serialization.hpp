#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fpph/corrector.hpp"
#include "fpph/errors.hpp"
#include "fpph/medium.hpp"
#include "fpph/util.hpp"

namespace fpph {

using nlohmann::json;

inline json to_json(const MediumSpec& spec) {
    json j;
    j["dimension"] = spec.dimension;
    j["undirected"] = spec.undirected;
    j["kind"] = to_string(spec.kind);
    switch (spec.kind) {
        case MediumKind::Constant:
            j["c"] = spec.c;
            break;
        case MediumKind::IidDiscrete:
            j["values"] = spec.values;
            j["probs"] = spec.probs;
            break;
        case MediumKind::IidUniform:
            j["lo"] = spec.lo;
            j["hi"] = spec.hi;
            break;
        case MediumKind::Periodic:
            j["period"] = spec.period;
            j["weights"] = spec.weights;
            break;
        case MediumKind::DiagonalSymmetric:
            j["atoms"] = spec.atoms;
            j["probs"] = spec.probs;
            j["level_seed"] = spec.level_seed;
            break;
    }
    return j;
}

inline MediumSpec medium_spec_from_json(const json& j) {
    MediumSpec spec;
    try {
        spec.dimension = j.at("dimension").get<int>();
        spec.undirected = j.value("undirected", true);
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "constant") {
            spec.kind = MediumKind::Constant;
            spec.c = j.at("c").get<double>();
        } else if (kind == "iid_discrete") {
            spec.kind = MediumKind::IidDiscrete;
            spec.values = j.at("values").get<std::vector<double>>();
            spec.probs = j.at("probs").get<std::vector<double>>();
        } else if (kind == "iid_uniform") {
            spec.kind = MediumKind::IidUniform;
            spec.lo = j.at("lo").get<double>();
            spec.hi = j.at("hi").get<double>();
        } else if (kind == "periodic") {
            spec.kind = MediumKind::Periodic;
            spec.period = j.at("period").get<int>();
            spec.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        } else if (kind == "diagonal_symmetric") {
            spec.kind = MediumKind::DiagonalSymmetric;
            spec.atoms = j.at("atoms").get<std::vector<std::vector<double>>>();
            spec.probs = j.at("probs").get<std::vector<double>>();
            spec.level_seed = j.value("level_seed", std::uint64_t{0});
        } else {
            throw config_error("unknown medium kind: " + kind);
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed medium spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

// Stable content hash of the canonical serialization; embedded in every
// result record for audit.
inline std::string medium_spec_hash(const MediumSpec& spec) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json(spec).dump())));
    return std::string(buf);
}

inline json to_json(const corrector::AtomicSpace& space) {
    json j;
    j["atoms"] = space.atoms;
    j["probs"] = space.probs;
    j["periodic"] = space.periodic;
    return j;
}

inline corrector::AtomicSpace atomic_space_from_json(const json& j) {
    corrector::AtomicSpace space;
    try {
        space.atoms = j.at("atoms").get<std::vector<std::vector<double>>>();
        space.probs = j.at("probs").get<std::vector<double>>();
        space.periodic = j.value("periodic", false);
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed atomic space: ") + e.what());
    }
    space.validate();
    return space;
}

}  // namespace fpph
