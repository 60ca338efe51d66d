#include "tedl/tree.hpp"

#include <cctype>
#include <fstream>
#include <functional>

namespace tedl {

size_t Tree::size() const {
    size_t n = 1;
    for (const auto& child : children) {
        n += child.size();
    }
    return n;
}

Alphabet::Alphabet(std::vector<std::string> labels) {
    for (auto& symbol : labels) {
        if (index_.count(symbol)) {
            throw std::invalid_argument("duplicate alphabet label '" + symbol + "'");
        }
        add(symbol);
    }
}

const std::string& Alphabet::label(Label id) const {
    if (id < 0 || static_cast<size_t>(id) > labels_.size()) {
        throw std::out_of_range("label id " + std::to_string(id) + " outside alphabet");
    }
    static const std::string gap_string(gap_token);
    return static_cast<size_t>(id) == labels_.size() ? gap_string : labels_[id];
}

Label Alphabet::index(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) {
        throw std::out_of_range("unknown label '" + std::string(symbol) + "'");
    }
    return it->second;
}

bool Alphabet::contains(std::string_view symbol) const {
    return index_.count(std::string(symbol)) > 0;
}

Label Alphabet::add(const std::string& symbol) {
    if (symbol.empty() || symbol == gap_token) {
        throw std::invalid_argument("'" + symbol + "' cannot be used as a label");
    }
    for (char ch : symbol) {
        if (ch == '(' || ch == ')' || ch == ',') {
            throw std::invalid_argument("label '" + symbol + "' contains a bracket character");
        }
    }
    auto it = index_.find(symbol);
    if (it != index_.end()) {
        return it->second;
    }
    Label id = static_cast<Label>(labels_.size());
    labels_.push_back(symbol);
    index_.emplace(symbol, id);
    return id;
}

ParseError::ParseError(const std::string& what, size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}

PreorderView preorder(const Tree& t) {
    PreorderView view;
    size_t n = t.size();
    view.labels.reserve(n);
    view.parents.reserve(n);
    view.child_rank.reserve(n);
    view.subtree_size.reserve(n);

    std::function<void(const Tree&, int, int)> visit = [&](const Tree& node, int parent, int rank) {
        int me = static_cast<int>(view.labels.size());
        view.labels.push_back(node.label);
        view.parents.push_back(parent);
        view.child_rank.push_back(rank);
        view.subtree_size.push_back(1);
        for (size_t r = 0; r < node.children.size(); ++r) {
            visit(node.children[r], me, static_cast<int>(r));
        }
        view.subtree_size[me] = static_cast<int>(view.labels.size()) - me;
    };
    visit(t, -1, 0);
    return view;
}

namespace {

bool is_space(char ch) {
    return std::isspace(static_cast<unsigned char>(ch)) != 0;
}

class BracketParser {
public:
    BracketParser(std::string_view text, std::function<Label(const std::string&, size_t)> resolve)
        : text_(text), resolve_(std::move(resolve)) {}

    Tree parse() {
        skip_space();
        if (pos_ == text_.size()) {
            throw ParseError("empty tree", pos_);
        }
        Tree t = parse_node();
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError(text_[pos_] == ')' ? "unbalanced ')'" : "trailing characters", pos_);
        }
        return t;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) {
            ++pos_;
        }
    }

    Tree parse_node() {
        skip_space();
        size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ',') {
            ++pos_;
        }
        std::string_view raw = text_.substr(start, pos_ - start);
        while (!raw.empty() && is_space(raw.back())) {
            raw.remove_suffix(1);
        }
        if (raw.empty()) {
            throw ParseError("missing label", start);
        }
        Tree node(resolve_(std::string(raw), start));
        if (pos_ < text_.size() && text_[pos_] == '(') {
            size_t open = pos_++;
            while (true) {
                node.children.push_back(parse_node());
                skip_space();
                if (pos_ == text_.size()) {
                    throw ParseError("unbalanced '('", open);
                }
                if (text_[pos_] == ',') {
                    ++pos_;
                } else if (text_[pos_] == ')') {
                    ++pos_;
                    break;
                } else {
                    throw ParseError("expected ',' or ')'", pos_);
                }
            }
        }
        return node;
    }

    std::string_view text_;
    std::function<Label(const std::string&, size_t)> resolve_;
    size_t pos_ = 0;
};

}

Tree parse_bracket(std::string_view text, const Alphabet& alphabet) {
    return BracketParser(text, [&](const std::string& symbol, size_t at) {
        if (!alphabet.contains(symbol)) {
            throw ParseError("unknown label '" + symbol + "'", at);
        }
        return alphabet.index(symbol);
    }).parse();
}

Tree parse_bracket_extend(std::string_view text, Alphabet& alphabet) {
    return BracketParser(text, [&](const std::string& symbol, size_t at) {
        if (symbol == Alphabet::gap_token) {
            throw ParseError("the gap token is not a node label", at);
        }
        return alphabet.add(symbol);
    }).parse();
}

std::string serialize_bracket(const Tree& t, const Alphabet& alphabet) {
    std::string out = alphabet.label(t.label);
    if (!t.children.empty()) {
        out += '(';
        for (size_t r = 0; r < t.children.size(); ++r) {
            if (r > 0) {
                out += ',';
            }
            out += serialize_bracket(t.children[r], alphabet);
        }
        out += ')';
    }
    return out;
}

std::vector<Tree> read_tree_corpus(const std::string& path, const Alphabet& alphabet) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open tree corpus '" + path + "'");
    }
    std::vector<Tree> trees;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool blank = true;
        for (char ch : line) {
            blank = blank && is_space(ch);
        }
        if (blank) {
            continue;
        }
        try {
            trees.push_back(parse_bracket(line, alphabet));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(), e.position());
        }
    }
    return trees;
}

void write_tree_corpus(const std::string& path, const std::vector<Tree>& trees, const Alphabet& alphabet) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write tree corpus '" + path + "'");
    }
    for (const auto& t : trees) {
        out << serialize_bracket(t, alphabet) << '\n';
    }
}

Tree chain_tree(const std::vector<Label>& sequence) {
    if (sequence.empty()) {
        throw std::invalid_argument("cannot encode an empty sequence as a tree");
    }
    Tree t(sequence.back());
    for (size_t k = sequence.size() - 1; k-- > 0;) {
        Tree parent(sequence[k]);
        parent.children.push_back(std::move(t));
        t = std::move(parent);
    }
    return t;
}

}
