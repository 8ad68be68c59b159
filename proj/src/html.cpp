#include "figa/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "figa/error.hpp"

namespace figa::html {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = lower(c);
    return out;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (s.size() - pos < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (lower(s[pos + i]) != prefix[i]) return false;
    return true;
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        i += len;
    }
    return true;
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_raw_text(std::string_view tag) {
    return tag == "script" || tag == "style" || tag == "textarea" || tag == "title" || tag == "xmp";
}

// Opening one of these closes an open element of the same name first.
bool closes_same(std::string_view tag) {
    return tag == "p" || tag == "li" || tag == "option" || tag == "tr" || tag == "td" || tag == "th" ||
           tag == "dt" || tag == "dd";
}

}  // namespace

class Builder {
public:
    explicit Builder(std::string_view src) : src_(src) {
        nodes_.push_back(Node{});
        stack_.push_back(0);
    }

    void run(Document& doc) {
        std::size_t i = 0;
        std::size_t text_start = 0;
        while (i < src_.size()) {
            if (src_[i] != '<') {
                ++i;
                continue;
            }
            std::size_t next = consume_markup(i, text_start);
            if (next == i) {
                ++i;  // literal '<'
                continue;
            }
            i = text_start = next;
        }
        flush_text(text_start, src_.size());
        doc.nodes_ = std::move(nodes_);
        doc.body_end_ = body_end_;
        doc.html_end_ = html_end_;
        doc.tail_closer_ = tail_closer_;
    }

private:
    int add(Node n) {
        n.parent = stack_.back();
        int id = static_cast<int>(nodes_.size());
        nodes_[static_cast<std::size_t>(n.parent)].children.push_back(id);
        nodes_.push_back(std::move(n));
        return id;
    }

    void flush_text(std::size_t begin, std::size_t end) {
        if (end <= begin) return;
        Node n;
        n.type = NodeType::text;
        n.text = decode_entities(src_.substr(begin, end - begin));
        n.source_begin = begin;
        n.source_end = end;
        add(std::move(n));
    }

    // Returns the position after the markup at `lt`, or `lt` if it is not markup.
    std::size_t consume_markup(std::size_t lt, std::size_t text_start) {
        if (src_.compare(lt, 4, "<!--") == 0) {
            flush_text(text_start, lt);
            auto end = src_.find("-->", lt + 4);
            if (end == std::string_view::npos) tail_closer_ = "-->";
            std::size_t stop = end == std::string_view::npos ? src_.size() : end + 3;
            Node n;
            n.type = NodeType::comment;
            n.text = std::string(src_.substr(lt + 4, (end == std::string_view::npos ? src_.size() : end) - lt - 4));
            n.source_begin = lt;
            n.source_end = stop;
            add(std::move(n));
            return stop;
        }
        if (lt + 1 < src_.size() && (src_[lt + 1] == '!' || src_[lt + 1] == '?')) {
            flush_text(text_start, lt);
            auto end = src_.find('>', lt);
            if (end == std::string_view::npos) tail_closer_ = ">";
            std::size_t stop = end == std::string_view::npos ? src_.size() : end + 1;
            Node n;
            n.type = src_[lt + 1] == '!' && starts_with_ci(src_, lt + 2, "doctype") ? NodeType::doctype : NodeType::comment;
            n.text = std::string(src_.substr(lt, stop - lt));
            n.source_begin = lt;
            n.source_end = stop;
            add(std::move(n));
            return stop;
        }
        if (lt + 1 < src_.size() && src_[lt + 1] == '/') {
            std::size_t p = lt + 2;
            if (p >= src_.size() || !std::isalpha(static_cast<unsigned char>(src_[p]))) return lt;
            flush_text(text_start, lt);
            std::size_t name_end = p;
            while (name_end < src_.size() && !is_space(src_[name_end]) && src_[name_end] != '>' && src_[name_end] != '/')
                ++name_end;
            auto name = to_lower(src_.substr(p, name_end - p));
            auto end = src_.find('>', name_end);
            if (name == "body") body_end_ = lt;
            if (name == "html") html_end_ = lt;
            close(name);
            if (end == std::string_view::npos) tail_closer_ = ">";
            return end == std::string_view::npos ? src_.size() : end + 1;
        }
        if (lt + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[lt + 1]))) {
            flush_text(text_start, lt);
            return start_tag(lt);
        }
        return lt;
    }

    std::size_t start_tag(std::size_t lt) {
        std::size_t p = lt + 1;
        std::size_t name_end = p;
        while (name_end < src_.size() && !is_space(src_[name_end]) && src_[name_end] != '>' && src_[name_end] != '/')
            ++name_end;
        Node n;
        n.type = NodeType::element;
        n.tag = to_lower(src_.substr(p, name_end - p));
        p = name_end;
        bool self_closing = false;
        char open_quote = 0;
        while (p < src_.size()) {
            while (p < src_.size() && (is_space(src_[p]) || src_[p] == '/')) {
                if (src_[p] == '/' && p + 1 < src_.size() && src_[p + 1] == '>') self_closing = true;
                ++p;
            }
            if (p >= src_.size() || src_[p] == '>') break;
            std::size_t an = p;
            while (p < src_.size() && !is_space(src_[p]) && src_[p] != '=' && src_[p] != '>' &&
                   !(src_[p] == '/' && p + 1 < src_.size() && src_[p + 1] == '>'))
                ++p;
            Attribute attr{to_lower(src_.substr(an, p - an)), {}};
            std::size_t q = p;
            while (q < src_.size() && is_space(src_[q])) ++q;
            if (q < src_.size() && src_[q] == '=') {
                ++q;
                while (q < src_.size() && is_space(src_[q])) ++q;
                if (q < src_.size() && (src_[q] == '"' || src_[q] == '\'')) {
                    char quote = src_[q];
                    auto close_q = src_.find(quote, q + 1);
                    if (close_q == std::string_view::npos) {
                        close_q = src_.size();
                        open_quote = quote;
                    }
                    attr.value = decode_entities(src_.substr(q + 1, close_q - q - 1));
                    p = std::min(close_q + 1, src_.size());
                } else {
                    std::size_t v = q;
                    while (q < src_.size() && !is_space(src_[q]) && src_[q] != '>') ++q;
                    attr.value = decode_entities(src_.substr(v, q - v));
                    p = q;
                }
            }
            if (!attr.name.empty() && !n.has_attribute(attr.name)) n.attributes.push_back(std::move(attr));
        }
        std::size_t stop = p < src_.size() ? p + 1 : src_.size();
        if (p >= src_.size()) tail_closer_ = (open_quote ? std::string(1, open_quote) : std::string()) + ">";
        n.source_begin = lt;
        n.source_end = stop;

        if (closes_same(n.tag)) close_if_open(n.tag);
        std::string tag = n.tag;
        int id = add(std::move(n));
        if (is_void_element(tag) || self_closing) return stop;

        if (is_raw_text(tag)) {
            // Content runs to the matching end tag (or the end of input).
            std::size_t end = stop;
            std::string closer = "</" + tag;
            while (true) {
                end = src_.find("</", end);
                if (end == std::string_view::npos) {
                    end = src_.size();
                    tail_closer_ = "</" + tag + ">";
                    break;
                }
                if (starts_with_ci(src_, end, closer)) break;
                end += 2;
            }
            auto& node = nodes_[static_cast<std::size_t>(id)];
            std::string_view body = src_.substr(stop, end - stop);
            node.text = tag == "script" || tag == "style" || tag == "xmp" ? std::string(body) : decode_entities(body);
            if (end >= src_.size()) return src_.size();
            auto gt = src_.find('>', end);
            if (gt == std::string_view::npos) tail_closer_ = ">";
            return gt == std::string_view::npos ? src_.size() : gt + 1;
        }
        stack_.push_back(id);
        return stop;
    }

    void close_if_open(const std::string& tag) {
        // Only within the nearest block scope: stop at elements that commonly contain these.
        for (std::size_t k = stack_.size(); k-- > 1;) {
            const auto& t = nodes_[static_cast<std::size_t>(stack_[k])].tag;
            if (t == tag) {
                stack_.resize(k);
                return;
            }
            if (t == "ul" || t == "ol" || t == "table" || t == "select" || t == "div" || t == "body" || t == "dl")
                return;
        }
    }

    void close(const std::string& tag) {
        for (std::size_t k = stack_.size(); k-- > 1;) {
            if (nodes_[static_cast<std::size_t>(stack_[k])].tag == tag) {
                stack_.resize(k);
                return;
            }
        }
    }

    std::string_view src_;
    std::vector<Node> nodes_;
    std::vector<int> stack_;
    std::optional<std::size_t> body_end_;
    std::optional<std::size_t> html_end_;
    std::string tail_closer_;
};

const std::string* Node::attribute(std::string_view name) const {
    for (const auto& a : attributes)
        if (a.name == name) return &a.value;
    return nullptr;
}

bool is_void_element(std::string_view tag) {
    static constexpr std::array<std::string_view, 14> kVoid = {"area", "base", "br", "col", "embed", "hr", "img",
                                                              "input", "link", "meta", "param", "source", "track",
                                                              "wbr"};
    return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

std::string decode_entities(std::string_view text) {
    if (text.find('&') == std::string_view::npos) return std::string(text);
    static constexpr std::pair<std::string_view, std::string_view> kNamed[] = {
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", "\xC2\xA0"}};
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] != '&') {
            out.push_back(text[i++]);
            continue;
        }
        auto semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(text[i++]);
            continue;
        }
        std::string_view ent = text.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!ent.empty() && ent[0] == '#') {
            unsigned long cp = 0;
            bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
            std::string digits(ent.substr(hex ? 2 : 1));
            if (!digits.empty() &&
                std::all_of(digits.begin(), digits.end(), [&](char c) {
                    return hex ? std::isxdigit(static_cast<unsigned char>(c)) : std::isdigit(static_cast<unsigned char>(c));
                })) {
                cp = std::stoul(digits, nullptr, hex ? 16 : 10);
                append_utf8(out, cp);
                done = true;
            }
        } else {
            for (auto [name, value] : kNamed) {
                if (ent == name) {
                    out += value;
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            i = semi + 1;
        } else {
            out.push_back(text[i++]);
        }
    }
    return out;
}

std::string compact_lower(std::string_view text) {
    std::string out;
    for (char c : text)
        if (!is_space(c)) out.push_back(lower(c));
    return out;
}

Document Document::parse(std::string_view source) {
    if (source.find('\0') != std::string_view::npos) throw ExtractionError("HTML contains NUL bytes");
    if (!valid_utf8(source)) throw ExtractionError("HTML is not valid UTF-8");
    Document doc;
    Builder(source).run(doc);
    return doc;
}

void Document::walk(const std::function<void(int)>& visit) const {
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        visit(id);
        const auto& kids = node(id).children;
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
}

std::vector<int> Document::elements() const {
    std::vector<int> out;
    walk([&](int id) {
        if (node(id).type == NodeType::element) out.push_back(id);
    });
    return out;
}

std::vector<int> Document::elements_by_tag(std::string_view tag) const {
    std::vector<int> out;
    walk([&](int id) {
        if (node(id).type == NodeType::element && node(id).tag == tag) out.push_back(id);
    });
    return out;
}

std::optional<int> Document::first_element(std::string_view tag) const {
    auto all = elements_by_tag(tag);
    if (all.empty()) return std::nullopt;
    return all.front();
}

std::string Document::visible_text(int id) const {
    std::string out;
    std::vector<int> stack{id};
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        const auto& n = node(cur);
        if (n.type == NodeType::text) {
            out += n.text;
            out.push_back(' ');
            continue;
        }
        if (n.type == NodeType::element) {
            if (n.tag == "script" || n.tag == "style" || n.tag == "template") continue;
            if (n.tag == "textarea" || n.tag == "title") {
                out += n.text;
                out.push_back(' ');
            }
        }
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

bool Document::display_suppressed(int id) const {
    for (int cur = id; cur > 0; cur = node(cur).parent) {
        const auto& n = node(cur);
        if (n.type != NodeType::element) continue;
        if (n.tag == "head") return true;
        if (n.has_attribute("hidden")) return true;
        if (const auto* style = n.attribute("style")) {
            auto s = compact_lower(*style);
            if (s.find("display:none") != std::string::npos || s.find("visibility:hidden") != std::string::npos)
                return true;
        }
    }
    return false;
}

}  // namespace figa::html
