#include "tedl/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tedl {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

double parse_number(const std::string& field, const std::string& path, size_t line) {
    try {
        size_t used = 0;
        std::string f = strip(field);
        double v = std::stod(f, &used);
        if (used != f.size()) {
            throw std::invalid_argument(f);
        }
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line) + ": not a number: '" + field + "'");
    }
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << std::setprecision(17);
    return out;
}

std::vector<std::string> symbols_with_gap(const Alphabet& alphabet) {
    std::vector<std::string> out = alphabet.labels();
    out.emplace_back(Alphabet::gap_token);
    return out;
}

}

void LabeledDataset::validate() const {
    if (trees.size() != labels.size()) {
        throw std::invalid_argument("dataset: " + std::to_string(trees.size()) + " trees but " +
                                    std::to_string(labels.size()) + " labels");
    }
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= class_names.size()) {
            throw std::invalid_argument("dataset: item " + std::to_string(i) + " has class id " +
                                        std::to_string(labels[i]) + " outside [0, " +
                                        std::to_string(class_names.size()) + ")");
        }
    }
    for (size_t i = 0; i < trees.size(); ++i) {
        std::vector<const Tree*> stack{&trees[i]};
        while (!stack.empty()) {
            const Tree* t = stack.back();
            stack.pop_back();
            if (t->label < 0 || static_cast<size_t>(t->label) >= alphabet.size()) {
                throw std::invalid_argument("dataset: item " + std::to_string(i) + " uses a label outside the alphabet");
            }
            for (const auto& c : t->children) {
                stack.push_back(&c);
            }
        }
    }
}

LabeledDataset generate_strings(uint64_t seed, int per_class) {
    if (per_class < 1) {
        throw std::invalid_argument("generate_strings: need at least one string per class");
    }
    LabeledDataset data;
    data.alphabet = Alphabet({"a", "b", "c", "d"});
    data.class_names = {"1", "2"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coin(0, 1);
    const int layout[2][2] = {{6, 5}, {5, 6}};
    for (int cls = 0; cls < 2; ++cls) {
        for (int s = 0; s < per_class; ++s) {
            std::vector<Label> seq;
            for (int r = 0; r < layout[cls][0]; ++r) {
                seq.push_back(coin(rng));
            }
            seq.push_back(2 + coin(rng));
            for (int r = 0; r < layout[cls][1]; ++r) {
                seq.push_back(coin(rng));
            }
            data.trees.push_back(chain_tree(seq));
            data.labels.push_back(cls);
        }
    }
    return data;
}

LabeledDataset subset(const LabeledDataset& data, const std::vector<int>& indices) {
    LabeledDataset out;
    out.alphabet = data.alphabet;
    out.class_names = data.class_names;
    for (int i : indices) {
        out.trees.push_back(data.trees.at(i));
        out.labels.push_back(data.labels.at(i));
    }
    return out;
}

nlohmann::json dataset_to_json(const LabeledDataset& data) {
    nlohmann::json j;
    j["alphabet"] = data.alphabet.labels();
    j["classes"] = data.class_names;
    j["items"] = nlohmann::json::array();
    for (size_t i = 0; i < data.size(); ++i) {
        j["items"].push_back({{"tree", serialize_bracket(data.trees[i], data.alphabet)}, {"label", data.labels[i]}});
    }
    return j;
}

LabeledDataset dataset_from_json(const nlohmann::json& j) {
    LabeledDataset data;
    const bool fixed_alphabet = j.contains("alphabet");
    if (fixed_alphabet) {
        data.alphabet = Alphabet(j.at("alphabet").get<std::vector<std::string>>());
    }
    std::map<std::string, int> class_ids;
    if (j.contains("classes")) {
        data.class_names = j.at("classes").get<std::vector<std::string>>();
        for (size_t c = 0; c < data.class_names.size(); ++c) {
            class_ids[data.class_names[c]] = static_cast<int>(c);
        }
    }
    int max_label = -1;
    const auto& items = j.at("items");
    for (size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        std::string text = item.at("tree").get<std::string>();
        try {
            data.trees.push_back(fixed_alphabet ? parse_bracket(text, data.alphabet)
                                                : parse_bracket_extend(text, data.alphabet));
        } catch (const ParseError& e) {
            throw ParseError("item " + std::to_string(i) + ": " + e.what(), e.position());
        }
        const auto& label = item.at("label");
        int id;
        if (label.is_string()) {
            auto it = class_ids.find(label.get<std::string>());
            if (it == class_ids.end()) {
                if (j.contains("classes")) {
                    throw std::invalid_argument("item " + std::to_string(i) + ": unknown class '" +
                                                label.get<std::string>() + "'");
                }
                it = class_ids.emplace(label.get<std::string>(), static_cast<int>(data.class_names.size())).first;
                data.class_names.push_back(label.get<std::string>());
            }
            id = it->second;
        } else {
            id = label.get<int>();
        }
        max_label = std::max(max_label, id);
        data.labels.push_back(id);
    }
    if (data.class_names.empty()) {
        for (int c = 0; c <= max_label; ++c) {
            data.class_names.push_back(std::to_string(c));
        }
    }
    data.validate();
    return data;
}

LabeledDataset read_dataset(const std::string& path) {
    std::ifstream in = open_in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return dataset_from_json(j);
}

void write_dataset(const std::string& path, const LabeledDataset& data) {
    std::ofstream out = open_out(path);
    out << dataset_to_json(data).dump(1) << '\n';
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << m(i, j);
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) {
            continue;
        }
        std::vector<double> row;
        for (const auto& f : split_csv(line)) {
            row.push_back(parse_number(f, path, line_no));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(rows.front().size()) + " fields");
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out = open_out(path);
    for (int l : labels) {
        out << l << '\n';
    }
}

std::vector<int> read_labels_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<int> labels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string f = strip(line);
        if (f.empty()) {
            continue;
        }
        double v = parse_number(f, path, line_no);
        if (v != static_cast<int>(v)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": label must be an integer");
        }
        labels.push_back(static_cast<int>(v));
    }
    return labels;
}

void write_cost_matrix_csv(const std::string& path, const ExplicitCostMatrix& c, const Alphabet& alphabet) {
    if (c.alphabet_size() != alphabet.size()) {
        throw std::invalid_argument("write_cost_matrix_csv: cost matrix does not match the alphabet");
    }
    std::ofstream out = open_out(path);
    auto symbols = symbols_with_gap(alphabet);
    out << "label";
    for (const auto& s : symbols) {
        out << ',' << s;
    }
    out << '\n';
    for (size_t x = 0; x < symbols.size(); ++x) {
        out << symbols[x];
        for (size_t y = 0; y < symbols.size(); ++y) {
            out << ',' << c.cost(static_cast<Label>(x), static_cast<Label>(y));
        }
        out << '\n';
    }
}

ExplicitCostMatrix read_cost_matrix_csv(const std::string& path, const Alphabet& alphabet) {
    std::ifstream in = open_in(path);
    auto symbols = symbols_with_gap(alphabet);
    const size_t n = symbols.size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::string line;
    size_t line_no = 0, row = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) {
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != n + 1) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(n + 1) +
                                     " fields");
        }
        if (!header) {
            for (size_t k = 0; k < n; ++k) {
                if (strip(fields[k + 1]) != symbols[k]) {
                    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": column " + std::to_string(k + 1) +
                                             " is '" + fields[k + 1] + "', expected '" + symbols[k] + "'");
                }
            }
            header = true;
            continue;
        }
        if (row >= n || strip(fields[0]) != symbols[row]) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unexpected row '" + fields[0] + "'");
        }
        for (size_t k = 0; k < n; ++k) {
            m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) = parse_number(fields[k + 1], path, line_no);
        }
        ++row;
    }
    if (row != n) {
        throw std::runtime_error(path + ": expected " + std::to_string(n) + " rows, found " + std::to_string(row));
    }
    return ExplicitCostMatrix(m);
}

void write_embedding_csv(const std::string& path, const EmbeddingCostModel& model, const Alphabet& alphabet) {
    if (model.alphabet_size() != alphabet.size()) {
        throw std::invalid_argument("write_embedding_csv: embedding does not match the alphabet");
    }
    std::ofstream out = open_out(path);
    out << "label";
    for (size_t v = 0; v < model.dimension(); ++v) {
        out << ",v" << v + 1;
    }
    out << '\n';
    for (size_t x = 0; x < alphabet.size(); ++x) {
        out << alphabet.label(static_cast<Label>(x));
        for (size_t v = 0; v < model.dimension(); ++v) {
            out << ',' << model.matrix()(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(x));
        }
        out << '\n';
    }
}

EmbeddingCostModel read_embedding_csv(const std::string& path, const Alphabet& alphabet) {
    std::ifstream in = open_in(path);
    std::string line;
    size_t line_no = 0;
    Eigen::Index dim = -1;
    Eigen::MatrixXd a;
    std::vector<char> seen(alphabet.size(), 0);
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) {
            continue;
        }
        auto fields = split_csv(line);
        if (dim < 0) {
            dim = static_cast<Eigen::Index>(fields.size()) - 1;
            if (dim < 1) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": header needs at least one dimension");
            }
            a = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(alphabet.size()));
            continue;
        }
        if (static_cast<Eigen::Index>(fields.size()) != dim + 1) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim + 1) +
                                     " fields");
        }
        std::string symbol = strip(fields[0]);
        if (!alphabet.contains(symbol)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown label '" + symbol + "'");
        }
        Label x = alphabet.index(symbol);
        seen[x] = 1;
        for (Eigen::Index v = 0; v < dim; ++v) {
            a(v, x) = parse_number(fields[static_cast<size_t>(v) + 1], path, line_no);
        }
    }
    for (size_t x = 0; x < alphabet.size(); ++x) {
        if (!seen[x]) {
            throw std::runtime_error(path + ": no row for label '" + alphabet.label(static_cast<Label>(x)) + "'");
        }
    }
    return EmbeddingCostModel(a);
}

}
