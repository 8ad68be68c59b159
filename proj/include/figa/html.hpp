#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace figa::html {

struct Attribute {
    std::string name;   // lowercase
    std::string value;  // entity-decoded
};

enum class NodeType { document, element, text, comment, doctype };

struct Node {
    NodeType type = NodeType::document;
    std::string tag;  // lowercase element name
    std::vector<Attribute> attributes;
    std::string text;  // text/comment payload; raw content for script/style
    int parent = -1;
    std::vector<int> children;
    // Byte span of the start tag (elements) or of the node text in the source.
    std::size_t source_begin = 0;
    std::size_t source_end = 0;

    const std::string* attribute(std::string_view name) const;
    bool has_attribute(std::string_view name) const { return attribute(name) != nullptr; }
};

// Error-recovering DOM. Unknown or misnested end tags are dropped, void
// elements never take children, and a few elements (p, li, option, tr, td,
// th) close an open sibling of the same kind. Input that is not valid UTF-8
// or that contains NUL bytes is rejected with ExtractionError.
class Document {
public:
    static Document parse(std::string_view source);

    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const Node& root() const { return nodes_.front(); }
    std::size_t size() const noexcept { return nodes_.size(); }

    // Element ids in document order.
    std::vector<int> elements() const;
    std::vector<int> elements_by_tag(std::string_view tag) const;
    std::optional<int> first_element(std::string_view tag) const;

    // Concatenated text under `id`, skipping script/style/template content.
    std::string visible_text(int id) const;

    // True when the element or an ancestor is hidden via the `hidden`
    // attribute or an inline display:none / visibility:hidden style, or when
    // it lives inside <head>.
    bool display_suppressed(int id) const;

    // Depth-first pre-order walk over all nodes.
    void walk(const std::function<void(int)>& visit) const;

    // Byte offset of the last </body> or </html> end tag, if any.
    std::optional<std::size_t> body_end_tag() const { return body_end_; }
    std::optional<std::size_t> html_end_tag() const { return html_end_; }
    // Text that terminates a comment or raw-text element left open at the end
    // of input ("-->", "</script>"); empty when the input ends cleanly.
    const std::string& open_tail_closer() const { return tail_closer_; }

private:
    friend class Builder;
    std::vector<Node> nodes_;
    std::optional<std::size_t> body_end_;
    std::optional<std::size_t> html_end_;
    std::string tail_closer_;
};

bool is_void_element(std::string_view tag);
std::string decode_entities(std::string_view text);
// Lowercased copy with all ASCII whitespace removed; used for inline styles.
std::string compact_lower(std::string_view text);

}  // namespace figa::html
