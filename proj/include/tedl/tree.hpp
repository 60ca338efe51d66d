#ifndef tedl_tree_hpp
#define tedl_tree_hpp

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tedl {

// Label ids are dense in [0, U); the gap symbol is always id U.
using Label = int;

/*
 * Ordered labeled tree, x(x_1, ..., x_R)
 */
struct Tree {
    Label label = 0;
    std::vector<Tree> children;

    Tree() = default;
    explicit Tree(Label l, std::vector<Tree> kids = {}) : label(l), children(std::move(kids)) {}

    size_t size() const;
    bool operator==(const Tree& other) const = default;
};

// A forest is just an ordered list of trees.
using Forest = std::vector<Tree>;

/*
 * Finite label set X with the reserved gap symbol "-" at index size().
 */
class Alphabet {
public:
    static constexpr std::string_view gap_token = "-";

    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> labels);

    size_t size() const { return labels_.size(); }
    Label gap() const { return static_cast<Label>(labels_.size()); }

    const std::string& label(Label id) const;
    Label index(std::string_view symbol) const;
    bool contains(std::string_view symbol) const;
    // Appends the symbol if it is not present yet and returns its id.
    Label add(const std::string& symbol);

    const std::vector<std::string>& labels() const { return labels_; }
    bool operator==(const Alphabet& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Label> index_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, size_t position);
    size_t position() const { return position_; }

private:
    size_t position_;
};

/*
 * Flattened pre-order view of a tree. Node 0 is the root; the descendants
 * of node i are exactly i+1 .. i+subtree_size[i]-1.
 */
struct PreorderView {
    std::vector<Label> labels;
    std::vector<int> parents;        // -1 for the root
    std::vector<int> child_rank;     // position among the parent's children
    std::vector<int> subtree_size;

    size_t size() const { return labels.size(); }
    bool is_ancestor(int i, int k) const { return i < k && k < i + subtree_size[i]; }
};

PreorderView preorder(const Tree& t);

// Bracket notation label(child,child,...). Labels must exist in the alphabet.
Tree parse_bracket(std::string_view text, const Alphabet& alphabet);
// Same grammar; unknown labels are appended to the alphabet.
Tree parse_bracket_extend(std::string_view text, Alphabet& alphabet);
std::string serialize_bracket(const Tree& t, const Alphabet& alphabet);

// One tree per non-empty line.
std::vector<Tree> read_tree_corpus(const std::string& path, const Alphabet& alphabet);
void write_tree_corpus(const std::string& path, const std::vector<Tree>& trees, const Alphabet& alphabet);

// Chain s1(s2(...(sn)...)) encoding of a sequence.
Tree chain_tree(const std::vector<Label>& sequence);

}
#endif /* tedl_tree_hpp */
