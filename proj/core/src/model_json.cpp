#include "hestopt/model_json.hpp"

#include <stdexcept>

#include <json.hpp>

namespace hestopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (item.key() == name) {
                known = true;
                break;
            }
        }
        if (!known) fail("unknown field \"" + item.key() + "\" in " + where);
    }
}

double get_number(const json& obj, const char* name, const std::string& where) {
    auto it = obj.find(name);
    if (it == obj.end()) fail("missing field \"" + std::string(name) + "\" in " + where);
    if (!it->is_number()) fail("field \"" + std::string(name) + "\" in " + where + " must be a number");
    return it->get<double>();
}

} // namespace

ModelInputs parse_model_inputs(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& err) {
        fail(std::string("model JSON does not parse: ") + err.what());
    }
    if (!doc.is_object()) fail("model document must be a JSON object");
    reject_unknown(doc, {"mu", "k", "theta", "sigma", "rho", "utility"}, "model document");

    ModelInputs inputs{};
    inputs.params.mu = get_number(doc, "mu", "model document");
    inputs.params.k = get_number(doc, "k", "model document");
    inputs.params.theta = get_number(doc, "theta", "model document");
    inputs.params.sigma = get_number(doc, "sigma", "model document");
    inputs.params.rho = get_number(doc, "rho", "model document");

    auto it = doc.find("utility");
    if (it == doc.end()) fail("missing field \"utility\" in model document");
    if (!it->is_object()) fail("\"utility\" must be an object");
    const json& u = *it;

    auto type_it = u.find("type");
    if (type_it == u.end() || !type_it->is_string()) {
        fail("utility.type must be \"power\" or \"exponential\"");
    }
    const std::string type = type_it->get<std::string>();
    if (type == "power") {
        reject_unknown(u, {"type", "gamma"}, "utility");
        inputs.utility = PowerUtility{get_number(u, "gamma", "utility")};
    } else if (type == "exponential") {
        reject_unknown(u, {"type", "c"}, "utility");
        inputs.utility = ExponentialUtility{get_number(u, "c", "utility")};
    } else {
        fail("utility.type must be \"power\" or \"exponential\", got \"" + type + "\"");
    }
    return inputs;
}

} // namespace hestopt
