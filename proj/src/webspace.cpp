#include "figa/webspace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "figa/error.hpp"
#include "figa/html.hpp"

namespace figa {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
bool is_vowel(char c) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::size_t count_char(std::string_view s, char c) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), c)); }

template <class Pred>
std::size_t count_if(std::string_view s, Pred pred) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), pred));
}

// Non-overlapping occurrences of `needle` in `hay`.
std::size_t count_substr(std::string_view hay, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
    return n;
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t longest_alnum_run(std::string_view s) {
    std::size_t best = 0, cur = 0;
    for (char c : s) {
        cur = is_alnum(c) ? cur + 1 : 0;
        best = std::max(best, cur);
    }
    return best;
}

struct UrlParts {
    std::string scheme;  // lowercase, empty when absent
    std::string freeurl;  // everything after "scheme://"
    std::string host;     // lowercase, no userinfo or port
    std::string path;     // from the first '/' after the authority up to '?' or '#'
};

UrlParts split_url(std::string_view url) {
    UrlParts parts;
    std::string_view rest = url;
    if (auto sep = url.find("://"); sep != std::string_view::npos) {
        parts.scheme = lower(url.substr(0, sep));
        rest = url.substr(sep + 3);
    }
    parts.freeurl = std::string(rest);
    auto auth_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, auth_end);
    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        authority = authority.substr(0, close == std::string_view::npos ? authority.size() : close + 1);
    } else if (auto colon = authority.find(':'); colon != std::string_view::npos) {
        authority = authority.substr(0, colon);
    }
    parts.host = lower(authority);
    if (auth_end != std::string_view::npos && rest[auth_end] == '/') {
        std::string_view path = rest.substr(auth_end);
        parts.path = std::string(path.substr(0, path.find_first_of("?#")));
    }
    return parts;
}

bool is_ip_host(std::string_view host) {
    if (!host.empty() && host.front() == '[') return true;
    return !host.empty() && std::all_of(host.begin(), host.end(), [](char c) { return is_digit(c) || c == '.'; });
}

std::size_t subdomain_length(std::string_view host) {
    if (is_ip_host(host)) return 0;
    std::string_view h = host;
    if (!h.empty() && h.back() == '.') h.remove_suffix(1);
    std::size_t labels = count_char(h, '.') + 1;
    if (labels <= 2) return 0;
    auto last = h.rfind('.');
    auto second = h.rfind('.', last - 1);
    return second;  // length of everything before the registrable domain, minus the joining dot
}

bool has_scheme(std::string_view s) {
    auto colon = s.find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    auto slash = s.find_first_of("/?#");
    if (slash != std::string_view::npos && slash < colon) return false;
    return is_alpha(s[0]) && std::all_of(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(colon), [](char c) {
               return is_alnum(c) || c == '+' || c == '-' || c == '.';
           });
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n\f");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n\f");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string collapse_spaces(std::string_view text) {
    std::string out;
    bool space = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

constexpr std::string_view kSuspiciousWords[] = {"cardnumber", "cvv",     "email",  "submit", "prepaid",
                                                 "bitcoin",    "log in",  "sign up", "logon", "register"};

constexpr std::string_view kSpecialSymbols = "@#$%&~!*^|";

void set(WebFeatureVector& v, std::string_view name, double value) { v[web_feature_index(name)] = value; }

void extract_url(std::string_view url, WebFeatureVector& v) {
    auto parts = split_url(url);
    std::size_t digits = count_if(url, is_digit);
    std::size_t alpha = count_if(url, is_alpha);
    std::size_t vowels = count_if(url, [](char c) { return is_alpha(c) && is_vowel(c); });
    std::string lurl = lower(url);

    set(v, "protocol", parts.scheme == "https" ? 1 : 0);
    set(v, "no_www", static_cast<double>(count_substr(lurl, "www")));
    set(v, "no_digits", static_cast<double>(digits));
    set(v, "no_alpha", static_cast<double>(alpha));
    set(v, "no_vowels", static_cast<double>(vowels));
    set(v, "no_constants", static_cast<double>(alpha - vowels));
    set(v, "no_alphanumeric", static_cast<double>(digits + alpha));
    set(v, "alph_digit_ratio", ratio(alpha, digits));
    set(v, "vowel_constant_ratio", ratio(vowels, alpha - vowels));
    set(v, "url_len", static_cast<double>(url.size()));
    set(v, "no_dots", static_cast<double>(count_char(url, '.')));
    set(v, "no_dash", static_cast<double>(count_char(url, '-')));
    set(v, "no_at", static_cast<double>(count_char(url, '@')));
    set(v, "no_percent", static_cast<double>(count_char(url, '%')));
    set(v, "no_eq", static_cast<double>(count_char(url, '=')));
    set(v, "no_ques", static_cast<double>(count_char(url, '?')));
    set(v, "no_dollar", static_cast<double>(count_char(url, '$')));
    set(v, "no_http", static_cast<double>(count_substr(lurl, "http")));
    set(v, "no_special_sym",
        static_cast<double>(count_if(url, [](char c) { return kSpecialSymbols.find(c) != std::string_view::npos; })));
    set(v, "longest_token", static_cast<double>(longest_alnum_run(url)));

    set(v, "len_freeurl", static_cast<double>(parts.freeurl.size()));
    set(v, "len_fqdn", static_cast<double>(parts.freeurl.size() - count_char(parts.freeurl, '/')));

    const auto& host = parts.host;
    set(v, "length_of_domains", static_cast<double>(host.size()));
    set(v, "dots_freeurl", static_cast<double>(count_char(host, '.')));
    set(v, "host_dig_let_ratio", ratio(count_if(host, is_alpha), count_if(host, is_digit)));
    set(v, "longest_token_hostname", static_cast<double>(longest_alnum_run(host)));
    set(v, "dig_in_hostname", static_cast<double>(count_if(host, is_digit)));
    set(v, "subdomain_len", static_cast<double>(subdomain_length(host)));

    set(v, "no_dir", static_cast<double>(count_char(parts.path, '/')));
    set(v, "hyphens_in_path", static_cast<double>(count_char(parts.path, '-')));
}

void extract_html(std::string_view page_host, const html::Document& doc, WebFeatureVector& v) {
    std::size_t href = 0, scripts = 0, images = 0, meta = 0, iframes = 0, forms = 0, anchors = 0;
    std::size_t passwd = 0, hidden = 0, mailto = 0, rightclick = 0, onmouseover = 0, title = 0;
    std::size_t relative = 0, insecure = 0, abnormal = 0, safe = 0;
    std::string script_text;

    for (int id : doc.elements()) {
        const auto& n = doc.node(id);
        const auto& tag = n.tag;
        if (const auto* h = n.attribute("href")) {
            ++href;
            if (lower(trim(*h)).starts_with("mailto:")) ++mailto;
        }
        if (n.has_attribute("oncontextmenu")) ++rightclick;
        if (n.has_attribute("onmouseover")) onmouseover = 1;
        if (tag == "script") {
            ++scripts;
            script_text += n.text;
            script_text.push_back('\n');
        } else if (tag == "img") {
            ++images;
        } else if (tag == "meta") {
            ++meta;
        } else if (tag == "iframe") {
            ++iframes;
        } else if (tag == "a") {
            ++anchors;
        } else if (tag == "title") {
            title = 1;
        } else if (tag == "input") {
            auto type = lower(trim(n.attribute("type") ? *n.attribute("type") : std::string()));
            if (type == "password") ++passwd;
            if (type == "hidden") ++hidden;
        } else if (tag == "form") {
            ++forms;
            auto action = trim(n.attribute("action") ? *n.attribute("action") : std::string());
            auto laction = lower(action);
            if (laction.starts_with("mailto:")) ++mailto;
            bool absolute = has_scheme(action) || action.starts_with("//");
            if (!action.empty() && !absolute) ++relative;
            if (laction.starts_with("http://")) ++insecure;
            bool same_host = false;
            if (absolute) {
                std::string target = action.starts_with("//") ? "http:" + action : action;
                same_host = !page_host.empty() && split_url(target).host == page_host;
            }
            if (action.empty() || laction == "about:blank" || (absolute && !same_host)) ++abnormal;
            if ((!action.empty() && !absolute) || (absolute && same_host)) ++safe;
        }
    }

    auto body = doc.first_element("body");
    std::string body_text;
    if (body) {
        body_text = doc.visible_text(*body);
    } else {
        for (int child : doc.root().children) {
            const auto& n = doc.node(child);
            if (n.type == html::NodeType::element && n.tag == "head") continue;
            if (n.type == html::NodeType::element && n.tag == "html") {
                for (int grand : n.children) {
                    const auto& g = doc.node(grand);
                    if (g.type == html::NodeType::element && g.tag == "head") continue;
                    body_text += doc.visible_text(grand);
                }
                continue;
            }
            body_text += doc.visible_text(child);
        }
    }

    auto text = collapse_spaces(lower(doc.visible_text(0)));
    std::size_t suspicious = 0;
    for (auto word : kSuspiciousWords) suspicious += count_substr(text, word);

    auto compact = html::compact_lower(script_text);
    std::size_t redirects = count_substr(compact, "location.href") + count_substr(compact, "location.replace(") +
                            count_substr(compact, "location.assign(");
    rightclick += count_substr(compact, "event.button==2");

    set(v, "href", static_cast<double>(href));
    set(v, "javascript", static_cast<double>(scripts));
    set(v, "text_in_body", static_cast<double>(word_count(body_text)));
    set(v, "images", static_cast<double>(images));
    set(v, "meta", static_cast<double>(meta));
    set(v, "suspicious_words", static_cast<double>(suspicious));
    set(v, "passwdfield", static_cast<double>(passwd));
    set(v, "iframes", static_cast<double>(iframes));
    set(v, "forms", static_cast<double>(forms));
    set(v, "relativeforms", static_cast<double>(relative));
    set(v, "hidden_text", static_cast<double>(hidden));
    set(v, "redirects", static_cast<double>(redirects));
    set(v, "url_of_anchor", static_cast<double>(anchors));
    set(v, "submit_to_mail", static_cast<double>(mailto));
    set(v, "rightclick_disabled", static_cast<double>(rightclick));
    set(v, "title", static_cast<double>(title));
    set(v, "popup", static_cast<double>(count_substr(compact, "window.open(")));
    set(v, "insecureforms", static_cast<double>(insecure));
    set(v, "abnormalforms", static_cast<double>(abnormal));
    set(v, "onmouseover", static_cast<double>(onmouseover));
    set(v, "userprompt", static_cast<double>(count_substr(compact, "prompt(")));
    set(v, "SFH", static_cast<double>(safe));
}

bool is_ratio_feature(std::string_view name) {
    return name == "alph_digit_ratio" || name == "vowel_constant_ratio" || name == "host_dig_let_ratio";
}

// One generated element per unit of the feature.
std::string_view generator(std::string_view feature) {
    if (feature == "href") return R"(<a href="#" style="display:none"></a>)";
    if (feature == "javascript") return "<script></script>";
    if (feature == "images") return R"(<img src="data:," alt="" width="0" height="0" style="display:none">)";
    if (feature == "meta") return R"(<meta name="generator" content="">)";
    if (feature == "forms") return R"(<form action="#" style="display:none"></form>)";
    if (feature == "iframes")
        return R"(<iframe src="about:blank" width="0" height="0" style="display:none" hidden></iframe>)";
    if (feature == "hidden_text") return R"(<input type="hidden" value="">)";
    if (feature == "redirects") return R"(<script>if (false) { window.location.replace("#"); }</script>)";
    if (feature == "submit_to_mail") return R"(<a href="mailto:contact@example.invalid" style="display:none"></a>)";
    return {};
}

// Insertion point for new <meta> tags and whether a <head> wrapper is needed.
std::pair<std::size_t, bool> meta_insertion_point(const html::Document& doc) {
    if (auto head = doc.first_element("head")) return {doc.node(*head).source_end, false};
    if (auto root = doc.first_element("html")) return {doc.node(*root).source_end, true};
    for (int child : doc.root().children) {
        const auto& n = doc.node(child);
        if (n.type == html::NodeType::doctype) return {n.source_end, true};
    }
    return {0, true};
}

}  // namespace

std::size_t web_feature_index(std::string_view name) {
    auto it = std::find(kWebFeatureNames.begin(), kWebFeatureNames.end(), name);
    if (it == kWebFeatureNames.end()) throw SchemaError("unknown web feature: " + std::string(name));
    return static_cast<std::size_t>(it - kWebFeatureNames.begin());
}

FeatureSchema web_feature_schema(std::span<const std::string> addable) {
    std::vector<std::string> add(addable.begin(), addable.end());
    if (add.empty())
        for (auto f : kInjectableFeatures) add.emplace_back(f);
    for (const auto& name : add) web_feature_index(name);
    std::vector<FeatureSpec> specs;
    for (auto name : kWebFeatureNames) {
        FeatureSpec spec;
        spec.name = std::string(name);
        spec.kind = is_ratio_feature(name) ? FeatureKind::continuous : FeatureKind::discrete;
        spec.mutable_ = true;
        spec.problem_space_addable = std::find(add.begin(), add.end(), name) != add.end();
        specs.push_back(std::move(spec));
    }
    return FeatureSchema(std::move(specs), "label", "phishing", "legitimate");
}

WebFeatureVector extract_features(const WebPage& page) {
    auto doc = html::Document::parse(page.html);
    WebFeatureVector v;
    extract_url(page.url, v);
    extract_html(split_url(page.url).host, doc, v);
    return v;
}

long InjectionPlan::operator[](std::string_view name) const {
    auto it = additions.find(web_feature_index(name));
    return it == additions.end() ? 0 : it->second;
}

InjectionPlan plan_injection(const WebFeatureVector& original, const WebFeatureVector& adversarial,
                             const FeatureSchema& schema) {
    if (schema.size() != kWebFeatureCount)
        throw ShapeError("web schema must have " + std::to_string(kWebFeatureCount) + " features");
    InjectionPlan plan;
    for (std::size_t i = 0; i < kWebFeatureCount; ++i) {
        double delta = adversarial[i] - original[i];
        if (std::abs(delta) <= 1e-9) continue;
        const auto& name = schema.feature(i).name;
        if (!schema.feature(i).problem_space_addable)
            throw InfeasibleError("feature " + name + " is not addable in problem space");
        if (delta < 0) throw InfeasibleError("feature " + name + " would have to decrease");
        double rounded = std::round(delta);
        if (std::abs(delta - rounded) > 1e-9) throw InfeasibleError("feature " + name + " delta is not integral");
        plan.additions[i] = static_cast<long>(rounded);
    }
    return plan;
}

WebPage inject(const WebPage& page, const InjectionPlan& plan) {
    if (plan.empty()) return page;
    std::string metas, hidden;
    for (auto [index, count] : plan.additions) {
        if (count < 0) throw InfeasibleError("negative addition for " + std::string(kWebFeatureNames.at(index)));
        auto name = kWebFeatureNames.at(index);
        auto snippet = generator(name);
        if (snippet.empty()) throw UnsupportedFeatureError("no HTML generator for feature " + std::string(name));
        auto& target = name == "meta" ? metas : hidden;
        for (long k = 0; k < count; ++k) target += snippet;
    }

    auto doc = html::Document::parse(page.html);
    std::string html = page.html;

    // Insert the later position first so the earlier offset stays valid.
    std::size_t container_at = html.size();
    std::string container;
    if (!hidden.empty()) {
        container = R"(<div hidden style="display:none" aria-hidden="true">)" + hidden + "</div>";
        if (auto b = doc.body_end_tag()) {
            container_at = *b;
        } else if (auto h = doc.html_end_tag()) {
            container_at = *h;
        } else {
            container = doc.open_tail_closer() + container;
        }
    }
    std::size_t meta_at = 0;
    if (!metas.empty()) {
        auto [at, wrap] = meta_insertion_point(doc);
        meta_at = at;
        if (wrap) metas = "<head>" + metas + "</head>";
    }
    if (!container.empty() && container_at >= meta_at) {
        html.insert(container_at, container);
        if (!metas.empty()) html.insert(meta_at, metas);
    } else {
        if (!metas.empty()) html.insert(meta_at, metas);
        if (!container.empty()) html.insert(container_at + metas.size(), container);
    }
    return WebPage{page.url, std::move(html)};
}

ProblemSpaceResult problem_space_attack(const WebPage& page, const FeatureRanking& ranking,
                                        const DirectionVector& direction, const ScalerState& scaler,
                                        const AttackConfig& config, const FeatureSchema& schema, const Model& model) {
    if (schema.size() != kWebFeatureCount)
        throw ShapeError("web schema must have " + std::to_string(kWebFeatureCount) + " features");
    AttackConfig cfg = config;
    std::vector<std::size_t> mask;
    for (std::size_t i = 0; i < kWebFeatureCount; ++i) {
        bool allowed = !config.feature_mask ||
                       std::find(config.feature_mask->begin(), config.feature_mask->end(), i) != config.feature_mask->end();
        if (allowed && schema.feature(i).problem_space_addable && direction[i] > 0) mask.push_back(i);
    }
    cfg.feature_mask = mask;

    ProblemSpaceResult r;
    r.original = extract_features(page);
    r.score_before = model.predict_score(r.original.span());
    r.label_before = r.score_before >= 0.5 ? 1 : 0;

    AttackPlan plan(ranking, direction, cfg, scaler, schema);
    r.selected = plan.selected();
    auto perturbed = perturb(r.original.span(), plan);
    std::copy(perturbed.begin(), perturbed.end(), r.adversarial.values.begin());

    r.plan = plan_injection(r.original, r.adversarial, schema);
    r.page = inject(page, r.plan);
    r.reextracted = extract_features(r.page);
    r.score_after = model.predict_score(r.reextracted.span());
    r.label_after = r.score_after >= 0.5 ? 1 : 0;
    return r;
}

std::string url_from_filename(std::string_view stem) {
    std::string s(stem);
    std::replace(s.begin(), s.end(), '_', '/');
    return "http://" + s;
}

WebPage load_page(const std::filesystem::path& html_path) {
    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IoError("cannot read " + p.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    WebPage page;
    page.html = read(html_path);
    auto sidecar = html_path;
    sidecar.replace_extension(".url");
    if (std::filesystem::exists(sidecar)) {
        page.url = trim(read(sidecar));
    } else {
        page.url = url_from_filename(html_path.stem().string());
    }
    return page;
}

}  // namespace figa
