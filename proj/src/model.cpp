#include "evidencenet/model.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace evidencenet {

namespace {

constexpr const char* kGrammar =
    "valid tokens: 'r' (relu), one of 'sh'|'lh'|'ih' (hyperprior granularity), 'sv' (variable "
    "likelihood width), '(n1, n2, ...)' (hidden layer sizes), or 'br' alone";

[[noreturn]] void bad_name(std::string_view s, const std::string& why) {
    throw std::invalid_argument("invalid model name '" + std::string(s) + "': " + why + "; " + kGrammar);
}

std::string_view trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

ModelSpec parse_name(std::string_view s) {
    const auto name = trim(s);
    if (name == "br") return ModelSpec{};
    if (name.empty()) bad_name(s, "empty name");

    ModelSpec spec;
    std::string_view rest = name;
    std::vector<std::size_t> hidden;
    bool have_hidden = false;

    const auto paren = rest.find('(');
    if (paren != std::string_view::npos) {
        const auto close = rest.find(')', paren);
        if (close == std::string_view::npos || trim(rest.substr(close + 1)) != "")
            bad_name(s, "malformed hidden-layer list");
        auto list = rest.substr(paren + 1, close - paren - 1);
        rest = rest.substr(0, paren);
        while (true) {
            const auto comma = list.find(',');
            auto item = trim(list.substr(0, comma));
            std::size_t v = 0;
            auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || ec != std::errc() || p != item.data() + item.size() || v == 0)
                bad_name(s, "hidden-layer sizes must be positive integers");
            hidden.push_back(v);
            if (comma == std::string_view::npos) break;
            list = list.substr(comma + 1);
        }
        have_hidden = true;
    }

    // Tokens must appear in grammar order: r, granularity, sv.
    int stage = 0;
    std::size_t pos = 0;
    rest = trim(rest);
    while (pos < rest.size()) {
        auto end = rest.find(' ', pos);
        if (end == std::string_view::npos) end = rest.size();
        const auto tok = rest.substr(pos, end - pos);
        pos = rest.find_first_not_of(' ', end);
        if (pos == std::string_view::npos) pos = rest.size();

        if (tok == "r" && stage < 1) {
            spec.arch.activation = Activation::relu;
            stage = 1;
        } else if ((tok == "sh" || tok == "lh" || tok == "ih") && stage < 2) {
            spec.granularity = tok == "sh" ? Granularity::single
                             : tok == "lh" ? Granularity::layer
                                           : Granularity::input_size;
            stage = 2;
        } else if (tok == "sv" && stage < 3) {
            spec.variable_sigma = true;
            stage = 3;
        } else {
            bad_name(s, "unexpected token '" + std::string(tok) + "'");
        }
    }
    if (!have_hidden && stage == 0) bad_name(s, "no tokens");
    spec.arch.hidden_sizes = std::move(hidden);
    return spec;
}

std::string format_name(const ModelSpec& spec) {
    std::vector<std::string> parts;
    if (spec.arch.activation == Activation::relu) parts.emplace_back("r");
    switch (spec.granularity) {
        case Granularity::single: parts.emplace_back("sh"); break;
        case Granularity::layer: parts.emplace_back("lh"); break;
        case Granularity::input_size: parts.emplace_back("ih"); break;
        case Granularity::fixed: break;
    }
    if (spec.variable_sigma) parts.emplace_back("sv");
    if (!spec.arch.hidden_sizes.empty()) {
        std::ostringstream os;
        os << '(';
        for (std::size_t i = 0; i < spec.arch.hidden_sizes.size(); ++i)
            os << (i ? ", " : "") << spec.arch.hidden_sizes[i];
        os << ')';
        parts.push_back(os.str());
    }
    if (parts.empty()) return "br";
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " " : "") + parts[i];
    return out;
}

std::string ModelSpec::name() const { return format_name(*this); }

bool ModelSpec::on_grid() const {
    if (variable_sigma != (granularity != Granularity::fixed)) return false;
    if (arch.activation == Activation::relu)
        return granularity == Granularity::fixed && !arch.hidden_sizes.empty();
    return true;
}

std::size_t hyper_count(const ModelSpec& spec) {
    const std::size_t layers = spec.arch.layer_count();
    switch (spec.granularity) {
        case Granularity::fixed: return 0;
        case Granularity::single: return 1;
        case Granularity::layer: return 2 * layers;
        case Granularity::input_size: {
            std::size_t n = 0;
            for (std::size_t l = 1; l <= layers; ++l) n += spec.arch.width(l - 1) + 1;
            return n;
        }
    }
    return 0;
}

std::size_t total_dim(const ModelSpec& spec) {
    return param_count(spec.arch) + hyper_count(spec) + (spec.variable_sigma ? 1 : 0);
}

HyperpriorParams hyperprior_params(const ModelSpec& spec) {
    if (spec.granularity == Granularity::fixed)
        throw std::invalid_argument("fixed granularity has no hyperpriors");
    HyperpriorParams out;
    const auto& arch = spec.arch;
    if (spec.granularity == Granularity::single) {
        out.hyper.push_back({1.0, 1.0});
        return out;
    }
    for (std::size_t l = 1; l <= arch.layer_count(); ++l) {
        const GammaPrior weight_prior{1.0, l >= 2 ? 1.0 / static_cast<double>(arch.width(l - 1)) : 1.0};
        const std::size_t n_weight = spec.granularity == Granularity::layer ? 1 : arch.width(l - 1);
        for (std::size_t k = 0; k < n_weight; ++k) out.hyper.push_back(weight_prior);
        out.hyper.push_back({1.0, 1.0});
    }
    return out;
}

ParamLayout make_layout(const ModelSpec& spec) {
    spec.arch.validate();
    const auto& arch = spec.arch;
    ParamLayout lay;
    lay.n_hyper = hyper_count(spec);
    if (spec.variable_sigma) lay.sigma_index = lay.n_hyper;
    lay.network_offset = lay.n_hyper + (spec.variable_sigma ? 1 : 0);
    lay.n_network = param_count(arch);
    lay.governor.reserve(lay.n_network);

    std::size_t offset = lay.network_offset;
    std::size_t hyper_base = 0;  // first hyperparameter index of the current layer
    for (std::size_t l = 1; l <= arch.layer_count(); ++l) {
        const std::size_t in = arch.width(l - 1);
        const std::size_t out = arch.width(l);
        const bool hidden = l < arch.layer_count();

        std::size_t bias_hyper = 0;
        switch (spec.granularity) {
            case Granularity::fixed:
                for (std::size_t i = 0; i < in * out + out; ++i) lay.governor.emplace_back(std::nullopt);
                break;
            case Granularity::single:
                for (std::size_t i = 0; i < in * out + out; ++i) lay.governor.emplace_back(0);
                break;
            case Granularity::layer:
                for (std::size_t i = 0; i < in * out; ++i) lay.governor.emplace_back(hyper_base);
                bias_hyper = hyper_base + 1;
                for (std::size_t i = 0; i < out; ++i) lay.governor.emplace_back(bias_hyper);
                hyper_base += 2;
                break;
            case Granularity::input_size:
                // w(i, k) multiplies activation k of the previous layer.
                for (std::size_t i = 0; i < out; ++i)
                    for (std::size_t k = 0; k < in; ++k) lay.governor.emplace_back(hyper_base + k);
                bias_hyper = hyper_base + in;
                for (std::size_t i = 0; i < out; ++i) lay.governor.emplace_back(bias_hyper);
                hyper_base += in + 1;
                break;
        }
        lay.blocks.push_back({offset, in * out, l, false, false});
        offset += in * out;
        lay.blocks.push_back({offset, out, l, true, hidden});
        offset += out;
    }
    return lay;
}

std::vector<ModelSpec> paper_grid() {
    std::vector<ModelSpec> grid;
    auto add = [&](const std::string& name) { grid.push_back(parse_name(name)); };
    add("br");
    add("sh sv");
    add("lh sv");
    add("ih sv");
    const std::vector<std::string> archs = {"(2)",    "(4)",       "(8)",          "(2, 2)",      "(4, 4)",
                                            "(2, 2, 2)", "(4, 4, 4)", "(2, 2, 2, 2)", "(4, 4, 4, 4)"};
    for (const auto& a : archs) {
        add(a);
        add("r " + a);
        add("sh sv " + a);
        add("lh sv " + a);
        add("ih sv " + a);
    }
    return grid;
}

std::vector<long> report_order_key(const ModelSpec& spec) {
    std::vector<long> key;
    key.push_back(static_cast<long>(spec.arch.hidden_sizes.size()));
    for (auto h : spec.arch.hidden_sizes) key.push_back(static_cast<long>(h));
    long variant = 0;
    switch (spec.granularity) {
        case Granularity::fixed: variant = spec.arch.activation == Activation::relu ? 1 : 0; break;
        case Granularity::single: variant = 2; break;
        case Granularity::layer: variant = 3; break;
        case Granularity::input_size: variant = 4; break;
    }
    key.push_back(variant);
    key.push_back(spec.variable_sigma ? 1 : 0);
    key.push_back(spec.arch.activation == Activation::relu ? 1 : 0);
    return key;
}

}  // namespace evidencenet
