#include "mixmad/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mixmad/schema.hpp"

namespace mixmad {

namespace detail {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
}  // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t chunk = (std::uint32_t(bytes[i]) << 16) |
                                    (std::uint32_t(bytes[i + 1]) << 8) | bytes[i + 2];
        out.push_back(kAlphabet[(chunk >> 18) & 0x3f]);
        out.push_back(kAlphabet[(chunk >> 12) & 0x3f]);
        out.push_back(kAlphabet[(chunk >> 6) & 0x3f]);
        out.push_back(kAlphabet[chunk & 0x3f]);
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t chunk = std::uint32_t(bytes[i]) << 16;
        out.push_back(kAlphabet[(chunk >> 18) & 0x3f]);
        out.push_back(kAlphabet[(chunk >> 12) & 0x3f]);
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t chunk = (std::uint32_t(bytes[i]) << 16) | (std::uint32_t(bytes[i + 1]) << 8);
        out.push_back(kAlphabet[(chunk >> 18) & 0x3f]);
        out.push_back(kAlphabet[(chunk >> 12) & 0x3f]);
        out.push_back(kAlphabet[(chunk >> 6) & 0x3f]);
        out.push_back('=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw std::invalid_argument("base64 payload length not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int values[4];
        int pad = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = text[i + j];
            if (c == '=') {
                if (i + 4 != text.size() || j < 2) throw std::invalid_argument("bad base64 padding");
                values[j] = 0;
                ++pad;
            } else {
                values[j] = decode_char(c);
                if (values[j] < 0 || pad > 0)
                    throw std::invalid_argument("invalid base64 character");
            }
        }
        const std::uint32_t chunk = (std::uint32_t(values[0]) << 18) | (std::uint32_t(values[1]) << 12) |
                                    (std::uint32_t(values[2]) << 6) | std::uint32_t(values[3]);
        out.push_back(static_cast<unsigned char>((chunk >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<unsigned char>((chunk >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<unsigned char>(chunk & 0xff));
    }
    return out;
}

std::string doubles_to_base64(std::span<const double> values) {
    std::vector<unsigned char> bytes;
    bytes.reserve(values.size() * 8);
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
    }
    return base64_encode(bytes);
}

std::vector<double> base64_to_doubles(const std::string& text, std::size_t expected_count) {
    const std::vector<unsigned char> bytes = base64_decode(text);
    if (bytes.size() != expected_count * 8)
        throw std::invalid_argument("parameter payload holds " + std::to_string(bytes.size() / 8) +
                                    " values, expected " + std::to_string(expected_count));
    std::vector<double> values(expected_count);
    for (std::size_t i = 0; i < expected_count; ++i) {
        std::uint64_t bits = 0;
        for (int j = 0; j < 8; ++j) bits |= std::uint64_t(bytes[i * 8 + j]) << (8 * j);
        std::memcpy(&values[i], &bits, sizeof bits);
    }
    return values;
}

}  // namespace detail

namespace {

nlohmann::json array_to_json(std::span<const double> values, std::vector<std::size_t> shape) {
    nlohmann::json j;
    j["shape"] = std::move(shape);
    j["data"] = detail::doubles_to_base64(values);
    return j;
}

std::vector<double> array_from_json(const nlohmann::json& j, std::vector<std::size_t> shape,
                                    const char* what) {
    const auto declared = j.at("shape").get<std::vector<std::size_t>>();
    if (declared != shape)
        throw std::runtime_error(std::string("model file: unexpected shape for ") + what);
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    return detail::base64_to_doubles(j.at("data").get<std::string>(), count);
}

nlohmann::json rbm_to_json(const MvRbm& rbm) {
    const auto dim = static_cast<std::size_t>(rbm.encoded_dim());
    const auto hidden = static_cast<std::size_t>(rbm.num_hidden());
    nlohmann::json j;
    j["visible"] = schema_to_json(rbm.visible());
    j["num_hidden"] = hidden;
    j["a"] = array_to_json({rbm.visible_bias().data(), dim}, {dim});
    j["b"] = array_to_json({rbm.hidden_bias().data(), hidden}, {hidden});
    std::vector<double> weights(dim * hidden);  // row-major: dim-major order
    for (std::size_t d = 0; d < dim; ++d)
        for (std::size_t k = 0; k < hidden; ++k)
            weights[d * hidden + k] = rbm.weights()(static_cast<Eigen::Index>(d),
                                                    static_cast<Eigen::Index>(k));
    j["W"] = array_to_json(weights, {dim, hidden});
    return j;
}

MvRbm rbm_from_json(const nlohmann::json& j) {
    Schema visible = schema_from_json(j.at("visible"));
    const auto hidden = j.at("num_hidden").get<std::size_t>();
    MvRbm rbm(std::move(visible), static_cast<int>(hidden));
    const auto dim = static_cast<std::size_t>(rbm.encoded_dim());
    const std::vector<double> a = array_from_json(j.at("a"), {dim}, "visible bias");
    const std::vector<double> b = array_from_json(j.at("b"), {hidden}, "hidden bias");
    const std::vector<double> w = array_from_json(j.at("W"), {dim, hidden}, "weights");
    for (std::size_t d = 0; d < dim; ++d) rbm.visible_bias()[static_cast<Eigen::Index>(d)] = a[d];
    for (std::size_t k = 0; k < hidden; ++k) rbm.hidden_bias()[static_cast<Eigen::Index>(k)] = b[k];
    for (std::size_t d = 0; d < dim; ++d)
        for (std::size_t k = 0; k < hidden; ++k)
            rbm.weights()(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
                w[d * hidden + k];
    return rbm;
}

}  // namespace

nlohmann::json ensemble_to_json(const EnsembleModel& model) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["schema"] = schema_to_json(model.schema());
    j["depth"] = model.depth();
    if (std::isinf(model.p())) j["p"] = "inf";
    else j["p"] = model.p();
    std::vector<int> ka, kd;
    for (int l = 0; l < model.depth() - 1; ++l) ka.push_back(model.chain().layer(l).num_hidden());
    for (int l = 1; l <= model.depth(); ++l) kd.push_back(model.detector(l).num_hidden());
    j["ka"] = ka;
    j["kd"] = kd;
    j["detectors"] = nlohmann::json::array();
    for (int l = 1; l <= model.depth(); ++l) j["detectors"].push_back(rbm_to_json(model.detector(l)));
    j["abstractions"] = nlohmann::json::array();
    for (int l = 0; l < model.depth() - 1; ++l)
        j["abstractions"].push_back(rbm_to_json(model.chain().layer(l)));
    return j;
}

EnsembleModel ensemble_from_json(const nlohmann::json& j) {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw std::runtime_error("model file has format_version " + std::to_string(version) +
                                 "; this build reads version " +
                                 std::to_string(kModelFormatVersion));
    Schema schema = schema_from_json(j.at("schema"));
    double p;
    if (j.at("p").is_string()) {
        if (j.at("p").get<std::string>() != "inf")
            throw std::runtime_error("model file: p must be a positive number or \"inf\"");
        p = kPInf;
    } else {
        p = j.at("p").get<double>();
    }
    std::vector<MvRbm> detectors;
    for (const auto& entry : j.at("detectors")) detectors.push_back(rbm_from_json(entry));
    std::vector<MvRbm> abstractions;
    for (const auto& entry : j.at("abstractions")) abstractions.push_back(rbm_from_json(entry));
    const auto depth = j.at("depth").get<std::size_t>();
    if (detectors.size() != depth)
        throw std::runtime_error("model file: depth disagrees with detector count");
    return EnsembleModel::from_parts(std::move(schema), std::move(detectors),
                                     std::move(abstractions), p);
}

void save_ensemble(const std::string& path, const EnsembleModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << ensemble_to_json(model).dump(2) << "\n";
    if (!out) throw std::runtime_error("failed writing model to '" + path + "'");
}

EnsembleModel load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid JSON in model file '" + path + "': " + e.what());
    }
    return ensemble_from_json(j);
}

}  // namespace mixmad
