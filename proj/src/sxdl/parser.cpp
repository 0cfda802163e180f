#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "selfx/sxdl.hpp"

namespace selfx::sxdl {

ParseError::ParseError(std::string message, SourceSpan where, std::string token)
    : Error(fmt::format("{}:{}: {}", where.line, where.column, message)),
      where_(where),
      token_(std::move(token)),
      detail_(std::move(message)) {}

namespace {

enum class Tok { Ident, String, Number, Colon, Semi, LBrace, RBrace, Equals, Dot, Arrow, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;  // source text; for strings the unescaped contents
    double number = 0.0;
    SourceSpan span;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::String: return fmt::format("\"{}\"", t.text);
        default: return t.text;
    }
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : src_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.span = {line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (ident_start(c)) {
                std::size_t b = pos_;
                while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
                t.kind = Tok::Ident;
                t.text = std::string(src_.substr(b, pos_ - b));
            } else if (c == '"') {
                lex_string(t);
            } else if (digit(c) || (c == '-' && peek(1) != '>')) {
                lex_number(t);
            } else if (c == '-') {
                advance(2);
                t.kind = Tok::Arrow;
                t.text = "->";
            } else {
                static constexpr std::string_view puncts = ":;{}=.";
                static constexpr Tok kinds[] = {Tok::Colon, Tok::Semi, Tok::LBrace, Tok::RBrace, Tok::Equals, Tok::Dot};
                auto k = puncts.find(c);
                if (k == std::string_view::npos) throw ParseError("unexpected character", t.span, printable(c));
                advance();
                t.kind = kinds[k];
                t.text = std::string(1, c);
            }
            out.push_back(std::move(t));
        }
    }

private:
    char peek(std::size_t ahead) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

    void advance(std::size_t n = 1) {
        while (n-- > 0 && pos_ < src_.size()) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    static std::string printable(char c) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u >= 0x7f) return fmt::format("\\x{:02x}", u);
        return std::string(1, c);
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                return;
            }
        }
    }

    void lex_string(Token& t) {
        advance();  // opening quote
        t.kind = Tok::String;
        for (;;) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') throw ParseError("unterminated string", t.span, "\"");
            char c = src_[pos_];
            if (c == '"') {
                advance();
                return;
            }
            if (c == '\\') {
                SourceSpan at{line_, col_};
                char e = peek(1);
                switch (e) {
                    case '"': t.text += '"'; break;
                    case '\\': t.text += '\\'; break;
                    case 'n': t.text += '\n'; break;
                    case 't': t.text += '\t'; break;
                    default: throw ParseError("invalid escape sequence", at, "\\" + printable(e));
                }
                advance(2);
                continue;
            }
            t.text += c;
            advance();
        }
    }

    void lex_number(Token& t) {
        std::size_t b = pos_;
        if (src_[pos_] == '-') advance();
        if (!digit(peek(0))) throw ParseError("malformed number", t.span, std::string(src_.substr(b, pos_ - b + 1)));
        while (digit(peek(0))) advance();
        if (peek(0) == '.' && digit(peek(1))) {
            advance();
            while (digit(peek(0))) advance();
        }
        if ((peek(0) == 'e' || peek(0) == 'E') &&
            (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
            advance(2);
            while (digit(peek(0))) advance();
        }
        if (ident_char(peek(0))) {
            std::size_t e = pos_;
            while (e < src_.size() && ident_char(src_[e])) ++e;
            throw ParseError("malformed number", t.span, std::string(src_.substr(b, e - b)));
        }
        t.kind = Tok::Number;
        t.text = std::string(src_.substr(b, pos_ - b));
        auto [end, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
        if (ec != std::errc{} || end != t.text.data() + t.text.size() || !std::isfinite(t.number))
            throw ParseError("number out of range", t.span, t.text);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

/// Names declared anywhere in the document, with the index of the declaring token.
std::map<std::string, std::size_t> declarations(const std::vector<Token>& toks) {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
        if (toks[i].kind != Tok::Ident || (toks[i].text != "class" && toks[i].text != "instance")) continue;
        if (toks[i + 1].kind == Tok::Ident && toks[i + 2].kind == Tok::Colon) out.emplace(toks[i + 1].text, i + 1);
    }
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)), declared_(declarations(toks_)) {}

    Document run() {
        Document doc;
        while (cur().kind != Tok::End) doc.statements.push_back(statement());
        return doc;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(std::size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(fmt::format("expected {}, found {}", what, describe(cur())), cur().span, describe(cur()));
    }

    bool at_keyword(std::string_view kw) const { return cur().kind == Tok::Ident && cur().text == kw; }

    void keyword(std::string_view kw) {
        if (!at_keyword(kw)) fail(fmt::format("'{}'", kw));
        ++pos_;
    }

    void expect(Tok kind, std::string_view what) {
        if (cur().kind != kind) fail(fmt::format("'{}'", what));
        ++pos_;
    }

    std::string ident(std::string_view what) {
        if (cur().kind != Tok::Ident) fail(std::string(what));
        return toks_[pos_++].text;
    }

    /// An identifier that refers to a class or instance declared in the document.
    std::string reference(std::string_view what) {
        if (cur().kind != Tok::Ident) fail(std::string(what));
        auto it = declared_.find(cur().text);
        if (it != declared_.end() && it->second > pos_)
            throw ParseError(fmt::format("forward reference to '{}'", cur().text), cur().span, cur().text);
        return toks_[pos_++].text;
    }

    Statement statement() {
        if (at_keyword("class")) return class_decl();
        if (at_keyword("instance")) return instance_decl();
        if (at_keyword("link")) return link_decl();
        if (at_keyword("environment")) return env_decl();
        if (at_keyword("behavior")) return behavior_decl();
        fail("a statement ('class', 'instance', 'link', 'environment' or 'behavior')");
    }

    ClassDecl class_decl() {
        ClassDecl d;
        d.span = cur().span;
        keyword("class");
        d.name = ident("a class name");
        expect(Tok::Colon, ":");
        d.parent = reference("a parent class name");
        expect(Tok::Semi, ";");
        return d;
    }

    InstanceDecl instance_decl() {
        InstanceDecl d;
        d.span = cur().span;
        keyword("instance");
        d.name = ident("an instance name");
        expect(Tok::Colon, ":");
        d.cls = reference("a class name");
        expect(Tok::LBrace, "{");
        while (cur().kind != Tok::RBrace) {
            if (at_keyword("role")) {
                RoleAssign r;
                r.span = cur().span;
                ++pos_;
                r.role = ident("a role name");
                expect(Tok::Arrow, "->");
                r.target = reference("a target instance name");
                expect(Tok::Semi, ";");
                d.items.emplace_back(std::move(r));
            } else if (at_attribute()) {
                d.items.emplace_back(attr_assign());
            } else {
                fail("'has', 'role' or '}'");
            }
        }
        ++pos_;
        return d;
    }

    // `has X` or the compact `hasX` form.
    bool at_attribute() const {
        if (cur().kind != Tok::Ident) return false;
        const std::string& t = cur().text;
        return t == "has" || (t.size() > 3 && t.starts_with("has") && (std::isupper(static_cast<unsigned char>(t[3])) || t[3] == '_'));
    }

    std::optional<Value> literal() {
        const Token& t = cur();
        if (t.kind == Tok::String) return Value{t.text};
        if (t.kind == Tok::Number) return Value{t.number};
        if (t.kind == Tok::Ident) {
            if (t.text == "true") return Value{true};
            if (t.text == "false") return Value{false};
            if (t.text == "nan") return Value{NotANumber{}};
        }
        return std::nullopt;
    }

    AttrAssign attr_assign() {
        AttrAssign a;
        a.span = cur().span;
        if (!at_attribute()) fail("'has'");
        if (cur().text == "has") {
            ++pos_;
            a.cls = reference("an attribute class name");
        } else {
            std::string cls = cur().text.substr(3);
            auto it = declared_.find(cls);
            if (it != declared_.end() && it->second > pos_)
                throw ParseError(fmt::format("forward reference to '{}'", cls), cur().span, cur().text);
            a.cls = std::move(cls);
            ++pos_;
        }

        if (cur().kind == Tok::Equals) {
            ++pos_;
            auto v = literal();
            if (!v) fail("a literal");
            a.value = *v;
            ++pos_;
            expect(Tok::Semi, ";");
            return a;
        }

        if (auto v = literal()) {
            a.value = *v;
        } else if (cur().kind == Tok::Ident) {
            a.value = cur().text;  // bare unit
        } else {
            fail("'=' or a unit");
        }
        ++pos_;
        a.nested = true;
        expect(Tok::LBrace, "{");
        while (cur().kind != Tok::RBrace) {
            if (!at_attribute()) fail("'has' or '}'");
            a.children.push_back(attr_assign());
        }
        ++pos_;
        return a;
    }

    LinkDecl link_decl() {
        LinkDecl d;
        d.span = cur().span;
        keyword("link");
        d.source = reference("a source instance name");
        expect(Tok::Dot, ".");
        d.role = ident("a role name");
        expect(Tok::Arrow, "->");
        d.target = reference("a target instance name");
        expect(Tok::Semi, ";");
        return d;
    }

    EnvDecl env_decl() {
        EnvDecl d;
        d.span = cur().span;
        keyword("environment");
        expect(Tok::LBrace, "{");
        while (cur().kind != Tok::RBrace) {
            if (!at_keyword("instance")) fail("'instance' or '}'");
            d.instances.push_back(instance_decl());
        }
        ++pos_;
        return d;
    }

    BehaviorDecl behavior_decl() {
        BehaviorDecl d;
        d.span = cur().span;
        keyword("behavior");
        if (cur().kind == Tok::Ident || cur().kind == Tok::String)
            d.name = toks_[pos_++].text;
        else
            fail("a behavior name");
        expect(Tok::LBrace, "{");
        keyword("effect");
        expect(Tok::Colon, ":");
        d.effect_cls = reference("an effect class name");
        expect(Tok::LBrace, "{");
        while (cur().kind != Tok::RBrace) {
            if (!at_attribute()) fail("'has' or '}'");
            d.props.push_back(attr_assign());
        }
        ++pos_;
        expect(Tok::RBrace, "}");
        return d;
    }

    std::vector<Token> toks_;
    std::map<std::string, std::size_t> declared_;
    std::size_t pos_ = 0;
};

}  // namespace

Document parse(std::string_view text) {
    return Parser(Lexer(text).run()).run();
}

Document parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace selfx::sxdl
