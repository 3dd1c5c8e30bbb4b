#include "ltvnet/structnet/serialize.hpp"

#include <sstream>

#include "ltvnet/common/csv.hpp"

namespace ltvnet::structnet {

using diffcore::MlpParams;

namespace {

std::string describe(const MlpParams& net) {
    std::string s;
    for (std::size_t i = 0; i < net.layer_sizes.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(net.layer_sizes[i]);
    }
    s += ':';
    s += diffcore::to_string(net.activation);
    return s;
}

void write_net(std::string& out, char tag, const MlpParams& net) {
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        out += tag;
        out += ".W" + std::to_string(l);
        const Matrix& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                out += ' ';
                out += format_double(w(r, c));
            }
        }
        out += '\n';
        out += tag;
        out += ".b" + std::to_string(l);
        for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) {
            out += ' ';
            out += format_double(net.biases[l](r));
        }
        out += '\n';
    }
}

std::string_view expect_field(std::string_view token, std::string_view key) {
    if (token.substr(0, key.size()) != key) {
        throw DataError("model header: expected '" + std::string(key) + "', got '" +
                        std::string(token) + "'");
    }
    return token.substr(key.size());
}

MlpParams parse_shape(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw DataError("model header: subnet spec missing activation: " + std::string(spec));
    }
    MlpParams shape;
    for (const auto& s : split(spec.substr(0, colon), ',')) {
        shape.layer_sizes.push_back(static_cast<Eigen::Index>(parse_integer(s)));
    }
    if (shape.layer_sizes.size() < 2) {
        throw DataError("model header: subnet needs at least 2 layer sizes");
    }
    for (auto s : shape.layer_sizes) {
        if (s <= 0) throw DataError("model header: non-positive layer size");
    }
    try {
        shape.activation = diffcore::parse_activation(spec.substr(colon + 1));
    } catch (const UsageError& e) {
        throw DataError(std::string("model header: ") + e.what());
    }
    for (std::size_t l = 0; l + 1 < shape.layer_sizes.size(); ++l) {
        shape.weights.push_back(Matrix::Zero(shape.layer_sizes[l + 1], shape.layer_sizes[l]));
        shape.biases.push_back(Vector::Zero(shape.layer_sizes[l + 1]));
    }
    return shape;
}

std::vector<double> read_tensor_line(std::istream& in, const std::string& name, std::size_t expected,
                                     std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("model file truncated before tensor " + name);
    }
    ++line_no;
    std::istringstream ls(line);
    std::string label;
    ls >> label;
    if (label != name) {
        throw DataError("model line " + std::to_string(line_no) + ": expected tensor " + name +
                        ", got '" + label + "'");
    }
    std::vector<double> values;
    std::string tok;
    while (ls >> tok) values.push_back(parse_double(tok));
    if (values.size() != expected) {
        throw DataError("model line " + std::to_string(line_no) + ": tensor " + name + " has " +
                        std::to_string(values.size()) + " values, expected " +
                        std::to_string(expected));
    }
    return values;
}

void read_net(std::istream& in, char tag, MlpParams& net, std::size_t& line_no) {
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix& w = net.weights[l];
        const auto wv = read_tensor_line(in, std::string(1, tag) + ".W" + std::to_string(l),
                                         static_cast<std::size_t>(w.size()), line_no);
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = wv[k++];
        }
        Vector& b = net.biases[l];
        const auto bv = read_tensor_line(in, std::string(1, tag) + ".b" + std::to_string(l),
                                         static_cast<std::size_t>(b.size()), line_no);
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = bv[static_cast<std::size_t>(r)];
    }
}

}  // namespace

std::string serialize_model(const StructuredModel& model) {
    validate(model);
    std::string out;
    out += std::string(kModelFormatTag) + " v" + std::to_string(kModelFormatVersion);
    out += " N=" + std::to_string(model.state_dim);
    out += " M=" + std::to_string(model.control_dim);
    out += " A=" + describe(model.a_net);
    out += " B=" + describe(model.b_net);
    out += '\n';
    write_net(out, 'A', model.a_net);
    write_net(out, 'B', model.b_net);
    return out;
}

StructuredModel parse_model(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string header;
    if (!std::getline(in, header)) {
        throw DataError("model file is empty");
    }
    std::istringstream hs(header);
    std::string tag, version, n, m, a, b;
    hs >> tag >> version >> n >> m >> a >> b;
    if (tag != kModelFormatTag) {
        throw DataError("not a structured model file (header '" + tag + "')");
    }
    if (version != "v" + std::to_string(kModelFormatVersion)) {
        throw DataError("unsupported model format version '" + version + "'");
    }

    StructuredModel model;
    model.state_dim = static_cast<Eigen::Index>(parse_integer(expect_field(n, "N=")));
    model.control_dim = static_cast<Eigen::Index>(parse_integer(expect_field(m, "M=")));
    model.a_net = parse_shape(expect_field(a, "A="));
    model.b_net = parse_shape(expect_field(b, "B="));
    validate(model);

    std::size_t line_no = 1;
    read_net(in, 'A', model.a_net, line_no);
    read_net(in, 'B', model.b_net, line_no);
    return model;
}

void save_model(const StructuredModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(model));
}

StructuredModel load_model(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw DataError("model file not found: " + path.string());
    }
    return parse_model(read_file(path));
}

}  // namespace ltvnet::structnet
