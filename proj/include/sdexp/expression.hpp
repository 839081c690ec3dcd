#pragma once

// Scalar coefficient expressions over a single variable u.
//
// Grammar:   expr   := term (('+'|'-') term)*
//            term   := unary (('*'|'/') unary)*
//            unary  := '-' unary | power
//            power  := atom ('^' unary)?            (right-associative)
//            atom   := number | 'u' | ('exp'|'log'|'sqrt') '(' expr ')' | '(' expr ')'
//
// Parsed once into a postfix program; evaluation is pure and allocation-free.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sdexp/errors.hpp"

namespace sdexp {

class Expression {
public:
    static Expression parse(std::string_view text) {
        Parser parser(text);
        Expression out;
        out.text_ = std::string(text);
        parser.parse_expr(out.program_);
        parser.expect_end();
        out.max_depth_ = compute_depth(out.program_);
        if (out.max_depth_ > kStackSize)
            throw ExpressionError("expression too deeply nested");
        return out;
    }

    double operator()(double u) const {
        std::array<double, kStackSize> stack;
        std::size_t top = 0;
        for (const Instr& instr : program_) {
            switch (instr.op) {
            case Op::PushConst: stack[top++] = instr.value; break;
            case Op::PushVar:   stack[top++] = u; break;
            case Op::Neg:       stack[top - 1] = -stack[top - 1]; break;
            case Op::Exp:       stack[top - 1] = std::exp(stack[top - 1]); break;
            case Op::Log:       stack[top - 1] = std::log(stack[top - 1]); break;
            case Op::Sqrt:      stack[top - 1] = std::sqrt(stack[top - 1]); break;
            case Op::Add:       --top; stack[top - 1] += stack[top]; break;
            case Op::Sub:       --top; stack[top - 1] -= stack[top]; break;
            case Op::Mul:       --top; stack[top - 1] *= stack[top]; break;
            case Op::Div:       --top; stack[top - 1] /= stack[top]; break;
            case Op::Pow:       --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            }
        }
        return stack[0];
    }

    const std::string& text() const { return text_; }

private:
    enum class Op : std::uint8_t {
        PushConst, PushVar, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt
    };
    struct Instr {
        Op op;
        double value = 0.0;
    };
    static constexpr std::size_t kStackSize = 64;

    std::vector<Instr> program_;
    std::string text_;
    std::size_t max_depth_ = 0;

    static std::size_t compute_depth(const std::vector<Instr>& program) {
        std::size_t depth = 0, max_depth = 0;
        for (const Instr& instr : program) {
            if (instr.op == Op::PushConst || instr.op == Op::PushVar)
                ++depth;
            else if (instr.op != Op::Neg && instr.op != Op::Exp &&
                     instr.op != Op::Log && instr.op != Op::Sqrt)
                --depth;
            max_depth = std::max(max_depth, depth);
        }
        if (depth != 1)
            throw ExpressionError("malformed expression program");
        return max_depth;
    }

    class Parser {
    public:
        explicit Parser(std::string_view text) : text_(text) {}

        void parse_expr(std::vector<Instr>& out) {
            parse_term(out);
            while (true) {
                skip_ws();
                if (consume('+')) { parse_term(out); out.push_back({Op::Add}); }
                else if (consume('-')) { parse_term(out); out.push_back({Op::Sub}); }
                else break;
            }
        }

        void expect_end() {
            skip_ws();
            if (pos_ != text_.size())
                fail("unexpected trailing input");
        }

    private:
        std::string_view text_;
        std::size_t pos_ = 0;

        void parse_term(std::vector<Instr>& out) {
            parse_unary(out);
            while (true) {
                skip_ws();
                if (consume('*')) { parse_unary(out); out.push_back({Op::Mul}); }
                else if (consume('/')) { parse_unary(out); out.push_back({Op::Div}); }
                else break;
            }
        }

        void parse_unary(std::vector<Instr>& out) {
            skip_ws();
            if (consume('-')) {
                parse_unary(out);
                out.push_back({Op::Neg});
                return;
            }
            parse_power(out);
        }

        void parse_power(std::vector<Instr>& out) {
            parse_atom(out);
            skip_ws();
            if (consume('^')) {
                parse_unary(out);
                out.push_back({Op::Pow});
            }
        }

        void parse_atom(std::vector<Instr>& out) {
            skip_ws();
            if (pos_ >= text_.size())
                fail("unexpected end of expression");
            const char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                out.push_back({Op::PushConst, parse_number()});
                return;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::string_view name = parse_ident();
                if (name == "u") {
                    out.push_back({Op::PushVar});
                    return;
                }
                Op fn;
                if (name == "exp") fn = Op::Exp;
                else if (name == "log") fn = Op::Log;
                else if (name == "sqrt") fn = Op::Sqrt;
                else fail("unknown identifier '" + std::string(name) + "'");
                skip_ws();
                if (!consume('('))
                    fail("expected '(' after function name");
                parse_expr(out);
                skip_ws();
                if (!consume(')'))
                    fail("expected ')'");
                out.push_back({fn});
                return;
            }
            if (consume('(')) {
                parse_expr(out);
                skip_ws();
                if (!consume(')'))
                    fail("expected ')'");
                return;
            }
            fail(std::string("unexpected character '") + c + "'");
        }

        double parse_number() {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
                ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t mark = pos_ + 1;
                if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-'))
                    ++mark;
                if (mark < text_.size() && std::isdigit(static_cast<unsigned char>(text_[mark]))) {
                    pos_ = mark;
                    while (pos_ < text_.size() &&
                           std::isdigit(static_cast<unsigned char>(text_[pos_])))
                        ++pos_;
                }
            }
            const std::string token(text_.substr(start, pos_ - start));
            try {
                std::size_t used = 0;
                const double value = std::stod(token, &used);
                if (used != token.size())
                    fail("bad number '" + token + "'");
                return value;
            } catch (const std::exception&) {
                fail("bad number '" + token + "'");
            }
            return 0.0; // unreachable
        }

        std::string_view parse_ident() {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   std::isalpha(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            return text_.substr(start, pos_ - start);
        }

        void skip_ws() {
            while (pos_ < text_.size() &&
                   std::isspace(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }

        bool consume(char c) {
            if (pos_ < text_.size() && text_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        [[noreturn]] void fail(const std::string& message) const {
            throw ExpressionError("expression error at offset " + std::to_string(pos_) +
                                  ": " + message);
        }
    };
};

} // namespace sdexp
