#include "qrnn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "qrnn/errors.hpp"

namespace qrnn {

namespace {

using nlohmann::json;

json quat_matrix_to_json(const QuatMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const Quaternion& q = m(r, c);
            row.push_back({q.a, q.b, q.c, q.d});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

QuatMatrix quat_matrix_from_json(const json& rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.at(0).size();
    QuatMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const auto& e = rows.at(i).at(j);
            m(i, j) = {e.at(0), e.at(1), e.at(2), e.at(3)};
        }
    return m;
}

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io_error, "cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        raise(ErrorKind::parse_error, path + ": " + e.what());
    }
    return doc;
}

void write_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::io_error, "cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out) raise(ErrorKind::io_error, "write failed for " + path);
}

}  // namespace

void save_checkpoint(const std::string& path, const QrnnParams& params, const TrainConfig& cfg) {
    json doc;
    doc["format"] = "qrnn-checkpoint";
    doc["version"] = 1;
    doc["kind"] = "qrnn";
    doc["loss"] = to_string(cfg.loss);
    doc["alpha"] = cfg.alpha;
    doc["sigma"] = cfg.sigma;
    doc["clip_norm"] = cfg.clip_norm;
    doc["window_len"] = cfg.window_len;
    doc["layers"] = cfg.layers;
    doc["hidden_activation"] = to_string(cfg.hidden_activation);
    doc["output_activation"] = to_string(cfg.output_activation);
    doc["seed"] = cfg.seed;
    doc["variant"] = to_string(cfg.variant);
    json p;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        std::string prefix = "layer." + std::to_string(l + 1) + ".";
        p[prefix + "W"] = quat_matrix_to_json(params.layers[l].W);
        p[prefix + "U"] = quat_matrix_to_json(params.layers[l].U);
        json b = json::array();
        for (const auto& q : params.layers[l].b) b.push_back({q.a, q.b, q.c, q.d});
        p[prefix + "b"] = std::move(b);
    }
    doc["params"] = std::move(p);
    write_file(path, doc);
}

void save_checkpoint(const std::string& path, const RealRnnParams& params,
                     const RealRnnConfig& cfg) {
    json doc;
    doc["format"] = "qrnn-checkpoint";
    doc["version"] = 1;
    doc["kind"] = "rnn";
    doc["loss"] = to_string(cfg.loss);
    doc["alpha"] = cfg.alpha;
    doc["sigma"] = cfg.sigma;
    doc["clip_norm"] = cfg.clip_norm;
    doc["window_len"] = cfg.window_len;
    doc["layers"] = cfg.layers;
    doc["seed"] = cfg.seed;
    json p;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        std::string prefix = "layer." + std::to_string(l + 1) + ".";
        auto mat = [](const RealMatrix& m) {
            json rows = json::array();
            for (std::size_t r = 0; r < m.rows(); ++r) {
                json row = json::array();
                for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
                rows.push_back(std::move(row));
            }
            return rows;
        };
        p[prefix + "W"] = mat(params.layers[l].W);
        p[prefix + "U"] = mat(params.layers[l].U);
        p[prefix + "b"] = params.layers[l].b;
    }
    doc["params"] = std::move(p);
    write_file(path, doc);
}

std::string checkpoint_kind(const std::string& path) {
    json doc = load_file(path);
    if (!doc.contains("kind")) raise(ErrorKind::parse_error, path + ": missing model kind");
    return doc["kind"].get<std::string>();
}

QrnnCheckpoint load_qrnn_checkpoint(const std::string& path) {
    json doc = load_file(path);
    try {
        if (doc.at("kind").get<std::string>() != "qrnn")
            raise(ErrorKind::parse_error, path + ": not a qrnn checkpoint");
        QrnnCheckpoint out;
        out.config.loss = doc.at("loss").get<std::string>() == "mcc" ? Loss::mcc : Loss::mse;
        out.config.alpha = doc.at("alpha").get<double>();
        out.config.sigma = doc.at("sigma").get<double>();
        out.config.clip_norm = doc.at("clip_norm").get<double>();
        out.config.window_len = doc.at("window_len").get<std::size_t>();
        out.config.layers = doc.at("layers").get<std::vector<std::size_t>>();
        out.config.hidden_activation = doc.at("hidden_activation").get<std::string>() == "tanh"
                                           ? SplitActivation::tanh
                                           : SplitActivation::identity;
        out.config.output_activation = doc.at("output_activation").get<std::string>() == "tanh"
                                           ? SplitActivation::tanh
                                           : SplitActivation::identity;
        out.config.seed = doc.at("seed").get<std::uint64_t>();
        std::string variant = doc.at("variant").get<std::string>();
        out.config.variant = variant == "mu-sum-plain"     ? MuSumVariant::mu_sum_plain
                             : variant == "mu-sum-rotated" ? MuSumVariant::mu_sum_rotated
                                                           : MuSumVariant::collapsed;
        const auto& p = doc.at("params");
        for (std::size_t l = 0; l + 1 < out.config.layers.size(); ++l) {
            std::string prefix = "layer." + std::to_string(l + 1) + ".";
            LayerParams lp;
            lp.W = quat_matrix_from_json(p.at(prefix + "W"));
            lp.U = quat_matrix_from_json(p.at(prefix + "U"));
            for (const auto& e : p.at(prefix + "b"))
                lp.b.push_back({e.at(0), e.at(1), e.at(2), e.at(3)});
            out.params.layers.push_back(std::move(lp));
        }
        return out;
    } catch (const json::exception& e) {
        raise(ErrorKind::parse_error, path + ": " + e.what());
    }
}

RealRnnCheckpoint load_rnn_checkpoint(const std::string& path) {
    json doc = load_file(path);
    try {
        if (doc.at("kind").get<std::string>() != "rnn")
            raise(ErrorKind::parse_error, path + ": not an rnn checkpoint");
        RealRnnCheckpoint out;
        out.config.loss = doc.at("loss").get<std::string>() == "mcc" ? Loss::mcc : Loss::mse;
        out.config.alpha = doc.at("alpha").get<double>();
        out.config.sigma = doc.at("sigma").get<double>();
        out.config.clip_norm = doc.at("clip_norm").get<double>();
        out.config.window_len = doc.at("window_len").get<std::size_t>();
        out.config.layers = doc.at("layers").get<std::vector<std::size_t>>();
        out.config.seed = doc.at("seed").get<std::uint64_t>();
        const auto& p = doc.at("params");
        for (std::size_t l = 0; l + 1 < out.config.layers.size(); ++l) {
            std::string prefix = "layer." + std::to_string(l + 1) + ".";
            RealLayerParams lp;
            auto mat = [](const json& rows) {
                std::size_t r = rows.size();
                std::size_t c = r == 0 ? 0 : rows.at(0).size();
                RealMatrix m(r, c);
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
                return m;
            };
            lp.W = mat(p.at(prefix + "W"));
            lp.U = mat(p.at(prefix + "U"));
            lp.b = p.at(prefix + "b").get<std::vector<double>>();
            out.params.layers.push_back(std::move(lp));
        }
        return out;
    } catch (const json::exception& e) {
        raise(ErrorKind::parse_error, path + ": " + e.what());
    }
}

}  // namespace qrnn
