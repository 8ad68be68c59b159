#include <gtest/gtest.h>

#include <fstream>

#include "figa/error.hpp"
#include "figa/html.hpp"
#include "figa/webspace.hpp"
#include "pages.hpp"
#include "support.hpp"

using namespace figa;

namespace {

WebFeatureVector with(WebFeatureVector v, std::string_view name, double delta) {
    v[web_feature_index(name)] += delta;
    return v;
}

InjectionPlan plan_of(std::initializer_list<std::pair<std::string_view, long>> items) {
    InjectionPlan p;
    for (auto [name, k] : items) p.additions[web_feature_index(name)] = k;
    return p;
}

std::size_t count_in_container(const WebPage& page, std::string_view tag) {
    auto doc = html::Document::parse(page.html);
    std::size_t n = 0;
    for (int id : doc.elements_by_tag(tag)) {
        for (int cur = doc.node(id).parent; cur > 0; cur = doc.node(cur).parent) {
            const auto& p = doc.node(cur);
            if (p.tag == "div" && p.has_attribute("aria-hidden")) {
                ++n;
                break;
            }
        }
    }
    return n;
}

}  // namespace

TEST(Html, ParsesNestedStructure) {
    auto doc = html::Document::parse("<html><body><p class=x>Hi &amp; bye<br><a href='y'>link</a></body></html>");
    auto p = doc.first_element("p");
    ASSERT_TRUE(p);
    EXPECT_EQ(*doc.node(*p).attribute("class"), "x");
    auto a = doc.first_element("a");
    ASSERT_TRUE(a);
    EXPECT_EQ(doc.node(*a).parent, *p);
    EXPECT_NE(doc.visible_text(0).find("Hi & bye"), std::string::npos);
    EXPECT_TRUE(doc.body_end_tag().has_value());
    EXPECT_TRUE(doc.open_tail_closer().empty());
}

TEST(Html, RawTextAndRecovery) {
    auto doc = html::Document::parse("<script>if (a < b) { x = '</div>'; }</script><p>one<p>two</span></p>");
    auto s = doc.first_element("script");
    ASSERT_TRUE(s);
    EXPECT_EQ(doc.node(*s).text, "if (a < b) { x = '</div>'; }");
    EXPECT_EQ(doc.elements_by_tag("p").size(), 2u);
    EXPECT_EQ(doc.node(doc.elements_by_tag("p")[1]).parent, 0);  // second <p> closed the first
}

TEST(Html, TailClosers) {
    EXPECT_EQ(html::Document::parse("<p>x<!-- open").open_tail_closer(), "-->");
    EXPECT_EQ(html::Document::parse("<script>var a").open_tail_closer(), "</script>");
    EXPECT_EQ(html::Document::parse("<div class=\"x").open_tail_closer(), "\">");
}

TEST(Html, DisplaySuppression) {
    auto doc = html::Document::parse(
        "<head><meta charset=utf-8></head><div style='DISPLAY: none'><img></div><span hidden><b></b></span><i></i>");
    EXPECT_TRUE(doc.display_suppressed(*doc.first_element("meta")));
    EXPECT_TRUE(doc.display_suppressed(*doc.first_element("img")));
    EXPECT_TRUE(doc.display_suppressed(*doc.first_element("b")));
    EXPECT_FALSE(doc.display_suppressed(*doc.first_element("i")));
}

TEST(Html, RejectsCatastrophicInput) {
    EXPECT_THROW(html::Document::parse(std::string("<p>a\0b</p>", 10)), ExtractionError);
    EXPECT_THROW(html::Document::parse("<p>\xff\xfe</p>"), ExtractionError);
}

TEST(Extract, UrlExample) {
    auto v = extract_features({"https://www.example.com", ""});
    EXPECT_EQ(v.at("protocol"), 1);
    EXPECT_EQ(v.at("no_www"), 1);
    EXPECT_EQ(v.at("no_dots"), 2);
    EXPECT_EQ(v.at("subdomain_len"), 3);
    EXPECT_EQ(v.at("url_len"), 23);
    EXPECT_EQ(v.at("len_freeurl"), 15);
    EXPECT_EQ(v.at("length_of_domains"), 15);
}

TEST(Extract, UrlCountingRules) {
    auto v = extract_features({"http://user@a1.b-c.example.co.uk:8080/x-y/z/p.php?q=1&r=$5%20#frag", ""});
    EXPECT_EQ(v.at("protocol"), 0);
    EXPECT_EQ(v.at("no_at"), 1);
    EXPECT_EQ(v.at("no_dollar"), 1);
    EXPECT_EQ(v.at("no_percent"), 1);
    EXPECT_EQ(v.at("no_eq"), 2);
    EXPECT_EQ(v.at("no_ques"), 1);
    EXPECT_EQ(v.at("no_dash"), 2);
    EXPECT_EQ(v.at("no_http"), 1);
    EXPECT_EQ(v.at("no_dir"), 3);          // "/x-y/z/p.php"
    EXPECT_EQ(v.at("hyphens_in_path"), 1);
    EXPECT_EQ(v.at("dots_freeurl"), 4);    // dots in the host a1.b-c.example.co.uk
    EXPECT_EQ(v.at("dig_in_hostname"), 1);
    EXPECT_EQ(v.at("subdomain_len"), std::string("a1.b-c.example").size());
    EXPECT_EQ(v.at("length_of_domains"), std::string("a1.b-c.example.co.uk").size());
    EXPECT_EQ(v.at("no_special_sym"), 5);  // @ & $ % #
}

TEST(Extract, RatiosWithZeroDenominators) {
    auto v = extract_features({"http://abc.de", ""});
    EXPECT_EQ(v.at("no_digits"), 0);
    EXPECT_EQ(v.at("alph_digit_ratio"), 0);
    EXPECT_EQ(v.at("host_dig_let_ratio"), 0);
    auto ip = extract_features({"http://10.0.0.1/a", ""});
    EXPECT_EQ(ip.at("subdomain_len"), 0);
    EXPECT_DOUBLE_EQ(ip.at("vowel_constant_ratio"), 0.25);  // a / h,t,t,p
    for (double x : ip.values) EXPECT_TRUE(std::isfinite(x));
}

TEST(Extract, HtmlExample) {
    auto v = extract_features({"http://a.com", "<html><body><a href='x'>a</a></body></html>"});
    EXPECT_EQ(v.at("href"), 1);
    EXPECT_EQ(v.at("url_of_anchor"), 1);
    EXPECT_EQ(v.at("images"), 0);
    EXPECT_EQ(v.at("iframes"), 0);
    EXPECT_EQ(v.at("text_in_body"), 1);
}

TEST(Extract, EmptyBody) {
    auto v = extract_features({"http://a.com", "<html><body></body></html>"});
    EXPECT_EQ(v.at("text_in_body"), 0);
    EXPECT_EQ(v.at("title"), 0);
    for (auto name : {"href", "javascript", "images", "meta", "forms", "iframes", "hidden_text", "redirects",
                      "submit_to_mail", "url_of_anchor", "passwdfield", "popup", "userprompt", "SFH"})
        EXPECT_EQ(v.at(name), 0) << name;
}

TEST(Extract, FormsAndScripts) {
    auto v = extract_features(
        {"https://shop.example.com/buy",
         "<title>t</title><body onmouseover='x()' oncontextmenu='return false'>"
         "<form action='/go'></form><form action='https://shop.example.com/p'></form>"
         "<form action='http://evil.example.org/x'></form><form></form><form action='mailto:a@b.c'></form>"
         "<input type=hidden><input type=PASSWORD>"
         "<script>window.open('u'); var r = prompt('pin'); location.replace('z'); if(event.button == 2){}</script>"
         "<p>Enter your CardNumber, CVV and email to sign  up</p></body>"});
    EXPECT_EQ(v.at("forms"), 5);
    EXPECT_EQ(v.at("relativeforms"), 1);
    EXPECT_EQ(v.at("insecureforms"), 1);
    EXPECT_EQ(v.at("abnormalforms"), 3);  // off-site, empty, mailto
    EXPECT_EQ(v.at("SFH"), 2);
    EXPECT_EQ(v.at("submit_to_mail"), 1);
    EXPECT_EQ(v.at("hidden_text"), 1);
    EXPECT_EQ(v.at("passwdfield"), 1);
    EXPECT_EQ(v.at("popup"), 1);
    EXPECT_EQ(v.at("userprompt"), 1);
    EXPECT_EQ(v.at("redirects"), 1);
    EXPECT_EQ(v.at("rightclick_disabled"), 2);
    EXPECT_EQ(v.at("onmouseover"), 1);
    EXPECT_EQ(v.at("title"), 1);
    EXPECT_EQ(v.at("suspicious_words"), 4);  // cardnumber, cvv, email, sign up
}

TEST(Extract, Deterministic) {
    std::mt19937 rng(4);
    for (int i = 0; i < 10; ++i) {
        auto page = figa::testing::synthetic_page(rng, {});
        EXPECT_EQ(extract_features(page), extract_features(page));
    }
}

TEST(WebSchema, DefaultsAndKinds) {
    auto s = web_feature_schema();
    ASSERT_EQ(s.size(), 52u);
    EXPECT_EQ(s.feature(0).name, "href");
    EXPECT_EQ(s.feature(51).name, "SFH");
    std::size_t addable = 0;
    for (const auto& f : s.features()) addable += f.problem_space_addable;
    EXPECT_EQ(addable, 9u);
    EXPECT_FALSE(s.feature(web_feature_index("text_in_body")).problem_space_addable);
    EXPECT_EQ(s.feature(web_feature_index("alph_digit_ratio")).kind, FeatureKind::continuous);
    EXPECT_EQ(s.feature(web_feature_index("href")).kind, FeatureKind::discrete);
    std::vector<std::string> custom{"href", "meta"};
    auto c = web_feature_schema(custom);
    EXPECT_TRUE(c.feature(web_feature_index("meta")).problem_space_addable);
    EXPECT_FALSE(c.feature(web_feature_index("images")).problem_space_addable);
}

TEST(PlanInjection, Examples) {
    auto schema = web_feature_schema();
    WebFeatureVector orig;
    orig[web_feature_index("href")] = 10;
    orig[web_feature_index("no_dir")] = 3;
    auto plan = plan_injection(orig, with(orig, "href", 3), schema);
    EXPECT_EQ(plan.additions.size(), 1u);
    EXPECT_EQ(plan["href"], 3);
    EXPECT_TRUE(plan_injection(orig, orig, schema).empty());
    EXPECT_THROW(plan_injection(orig, with(orig, "no_dir", -1), schema), InfeasibleError);
    EXPECT_THROW(plan_injection(orig, with(orig, "href", -2), schema), InfeasibleError);
    EXPECT_THROW(plan_injection(orig, with(orig, "href", 0.5), schema), InfeasibleError);
}

TEST(Inject, ThreeAnchorsInContainer) {
    WebPage page{"http://a.com", "<html><body><p>hello</p></body></html>"};
    auto out = inject(page, plan_of({{"href", 3}}));
    EXPECT_EQ(count_in_container(out, "a"), 3u);
    auto before = extract_features(page), after = extract_features(out);
    EXPECT_EQ(after.at("href"), before.at("href") + 3);
    EXPECT_EQ(after.at("url_of_anchor"), before.at("url_of_anchor") + 3);
    EXPECT_EQ(after.at("text_in_body"), before.at("text_in_body"));
}

TEST(Inject, EmptyPlanIsByteIdentical) {
    WebPage page{"http://a.com", "<p>unclosed <b>markup"};
    EXPECT_EQ(inject(page, {}).html, page.html);
}

TEST(Inject, MetaGoesToHeadIframeToContainer) {
    WebPage page{"http://a.com", "<!doctype html><html><head><title>x</title></head><body>t</body></html>"};
    auto out = inject(page, plan_of({{"meta", 2}, {"iframes", 1}}));
    auto doc = html::Document::parse(out.html);
    auto head = doc.first_element("head");
    ASSERT_TRUE(head);
    std::size_t metas_in_head = 0;
    for (int id : doc.elements_by_tag("meta")) metas_in_head += doc.node(id).parent == *head;
    EXPECT_EQ(metas_in_head, 2u);
    EXPECT_EQ(count_in_container(out, "iframe"), 1u);
    auto iframe = doc.node(*doc.first_element("iframe"));
    EXPECT_EQ(*iframe.attribute("width"), "0");
    EXPECT_EQ(*iframe.attribute("height"), "0");
}

TEST(Inject, HeadlessPagesGetAHead) {
    for (std::string html : {"<html><body>x</body></html>", "<!DOCTYPE html><p>x", "just text"}) {
        WebPage page{"http://a.com", html};
        auto out = inject(page, plan_of({{"meta", 1}}));
        auto doc = html::Document::parse(out.html);
        auto meta = doc.first_element("meta");
        ASSERT_TRUE(meta) << html;
        EXPECT_TRUE(doc.display_suppressed(*meta)) << html;
    }
}

TEST(Inject, EveryGeneratorIsAdditiveAndHidden) {
    WebPage page{"http://a.com", "<html><head></head><body><p>visible words here</p></body></html>"};
    auto base = extract_features(page);
    for (auto feature : kInjectableFeatures) {
        auto out = inject(page, plan_of({{feature, 2}}));
        auto v = extract_features(out);
        EXPECT_GE(v.at(feature), base.at(feature) + 2) << feature;
        EXPECT_EQ(v.at("text_in_body"), base.at("text_in_body")) << feature;
        auto a = html::Document::parse(page.html), b = html::Document::parse(out.html);
        EXPECT_EQ(figa::testing::node_signatures(a, true), figa::testing::node_signatures(b, true)) << feature;
    }
}

TEST(Inject, UnsupportedFeature) {
    WebPage page{"http://a.com", "<p>x</p>"};
    EXPECT_THROW(inject(page, plan_of({{"no_dir", 1}})), UnsupportedFeatureError);
    EXPECT_THROW(inject(page, plan_of({{"text_in_body", 1}})), UnsupportedFeatureError);
}

TEST(Inject, ClosesTruncatedTails) {
    for (std::string html : {"<p>a<!-- open", "<p>a<script>var x", "<p>a<div class=\"x", "<p>a<textarea>t"}) {
        WebPage page{"http://a.com", html};
        auto out = inject(page, plan_of({{"images", 1}, {"forms", 1}}));
        EXPECT_GT(out.html.size(), page.html.size());
        auto v = extract_features(out);
        EXPECT_EQ(v.at("images"), extract_features(page).at("images") + 1) << html;
        EXPECT_EQ(v.at("forms"), extract_features(page).at("forms") + 1) << html;
    }
}

TEST(UrlFromFilename, Convention) {
    EXPECT_EQ(url_from_filename("example.com_login"), "http://example.com/login");
    figa::testing::TempDir dir;
    {
        std::ofstream(dir.path() / "a.html") << "<p>x</p>";
        std::ofstream(dir.path() / "a.url") << "https://b.org/q\n";
        std::ofstream(dir.path() / "c.org_x_y.html") << "<p>y</p>";
    }
    EXPECT_EQ(load_page(dir.path() / "a.html").url, "https://b.org/q");
    EXPECT_EQ(load_page(dir.path() / "c.org_x_y.html").url, "http://c.org/x/y");
    EXPECT_THROW(load_page(dir.path() / "missing.html"), IoError);
}
