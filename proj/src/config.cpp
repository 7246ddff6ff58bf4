#include "dnls/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "dnls/errors.hpp"
#include "dnls/evolution.hpp"
#include "dnls/field_io.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

namespace {

// ---------------------------------------------------------------------------
// Minimal TOML subset: [section] headers, key = value lines, strings, numbers,
// booleans, arrays and inline tables (both may span lines), # comments.

struct Value {
    enum class Type { boolean, number, string, array, table };
    Type type = Type::number;
    bool boolean = false;
    double number = 0.0;
    std::string text;
    std::vector<Value> items;      // array elements, or table values
    std::vector<std::string> keys; // table keys, parallel to items
    int line = 0;

    const Value* find(const std::string& key) const
    {
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (keys[i] == key)
                return &items[i];
        return nullptr;
    }
};

[[noreturn]] void fail_at(int line, const std::string& msg)
{
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Value document()
    {
        Value root;
        root.type = Value::Type::table;
        Value* section = &root;
        while (true) {
            skip_blank_lines();
            if (pos_ >= s_.size())
                break;
            if (s_[pos_] == '[') {
                ++pos_;
                skip_spaces();
                const std::string name = key();
                skip_spaces();
                expect(']');
                end_of_line();
                if (root.find(name))
                    fail_at(line_, "duplicate section [" + name + "]");
                Value table;
                table.type = Value::Type::table;
                table.line = line_;
                root.keys.push_back(name);
                root.items.push_back(std::move(table));
                section = &root.items.back();
                continue;
            }
            const int at = line_;
            const std::string k = key();
            skip_spaces();
            expect('=');
            skip_spaces();
            Value v = value();
            v.line = at;
            if (section->find(k))
                fail_at(at, "duplicate key '" + k + "'");
            section->keys.push_back(k);
            section->items.push_back(std::move(v));
            end_of_line();
        }
        return root;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;

    [[noreturn]] void fail(const std::string& msg) const { fail_at(line_, msg); }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    void skip_spaces()
    {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r'))
            ++pos_;
    }

    void skip_comment()
    {
        if (peek() == '#')
            while (pos_ < s_.size() && s_[pos_] != '\n')
                ++pos_;
    }

    // Whitespace, newlines and comments, as allowed inside brackets.
    void skip_all()
    {
        while (pos_ < s_.size()) {
            skip_spaces();
            skip_comment();
            if (peek() == '\n') {
                ++pos_;
                ++line_;
            } else {
                break;
            }
        }
    }

    void skip_blank_lines() { skip_all(); }

    void end_of_line()
    {
        skip_spaces();
        skip_comment();
        if (pos_ < s_.size()) {
            if (s_[pos_] != '\n')
                fail("unexpected text after value");
            ++pos_;
            ++line_;
        }
    }

    void expect(char c)
    {
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string key()
    {
        if (peek() == '"')
            return quoted();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
            ++pos_;
        if (pos_ == start)
            fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string quoted()
    {
        expect('"');
        std::string out;
        while (true) {
            if (pos_ >= s_.size() || s_[pos_] == '\n')
                fail("unterminated string");
            const char c = s_[pos_++];
            if (c == '"')
                break;
            if (c == '\\') {
                if (pos_ >= s_.size())
                    fail("unterminated string");
                const char e = s_[pos_++];
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    Value value()
    {
        Value v;
        v.line = line_;
        const char c = peek();
        if (c == '"') {
            v.type = Value::Type::string;
            v.text = quoted();
        } else if (c == '[') {
            ++pos_;
            v.type = Value::Type::array;
            skip_all();
            while (peek() != ']') {
                v.items.push_back(value());
                skip_all();
                if (peek() == ',') {
                    ++pos_;
                    skip_all();
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            ++pos_;
        } else if (c == '{') {
            ++pos_;
            v.type = Value::Type::table;
            skip_all();
            while (peek() != '}') {
                const std::string k = key();
                skip_spaces();
                expect('=');
                skip_all();
                if (v.find(k))
                    fail("duplicate key '" + k + "' in inline table");
                v.keys.push_back(k);
                v.items.push_back(value());
                skip_all();
                if (peek() == ',') {
                    ++pos_;
                    skip_all();
                } else if (peek() != '}') {
                    fail("expected ',' or '}' in inline table");
                }
            }
            ++pos_;
        } else if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            v.type = Value::Type::boolean;
            v.boolean = true;
        } else if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            v.type = Value::Type::boolean;
        } else {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '+'
                                        || s_[pos_] == '-' || s_[pos_] == '.'))
                ++pos_;
            std::string token(s_.substr(start, pos_ - start));
            if (token.empty())
                fail("expected a value");
            const char* first = token.data();
            if (*first == '+')
                ++first;
            const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v.number);
            if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v.number))
                fail("invalid number '" + token + "'");
            v.type = Value::Type::number;
        }
        return v;
    }
};

// ---------------------------------------------------------------------------
// Typed access with key checking.

std::size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t cost = std::tolower(a[i - 1]) == std::tolower(b[j - 1]) ? 0 : 1;
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
            diag = up;
        }
    }
    return row[b.size()];
}

void check_keys(const Value& table, const std::vector<std::string>& allowed, const std::string& where)
{
    for (std::size_t i = 0; i < table.keys.size(); ++i) {
        const std::string& k = table.keys[i];
        if (std::find(allowed.begin(), allowed.end(), k) != allowed.end())
            continue;
        std::vector<std::string> ranked = allowed;
        std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& x, const std::string& y) {
            return edit_distance(k, x) < edit_distance(k, y);
        });
        std::ostringstream msg;
        msg << "unknown key '" << k << "' in " << where << "; did you mean '" << ranked.front()
            << "'? valid keys:";
        for (const auto& a : allowed)
            msg << ' ' << a;
        fail_at(table.items[i].line, msg.str());
    }
}

double as_number(const Value& v, const std::string& what)
{
    if (v.type != Value::Type::number)
        fail_at(v.line, what + " must be a number");
    return v.number;
}

int as_int(const Value& v, const std::string& what)
{
    const double x = as_number(v, what);
    if (x != std::floor(x) || std::abs(x) > 1e9)
        fail_at(v.line, what + " must be an integer");
    return static_cast<int>(x);
}

bool as_bool(const Value& v, const std::string& what)
{
    if (v.type != Value::Type::boolean)
        fail_at(v.line, what + " must be true or false");
    return v.boolean;
}

std::string as_string(const Value& v, const std::string& what)
{
    if (v.type != Value::Type::string)
        fail_at(v.line, what + " must be a string");
    return v.text;
}

std::vector<double> as_numbers(const Value& v, const std::string& what)
{
    if (v.type != Value::Type::array)
        fail_at(v.line, what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& item : v.items)
        out.push_back(as_number(item, what));
    return out;
}

Point as_point(const Value& v, const std::string& what)
{
    const auto xs = as_numbers(v, what);
    if (xs.size() > 3)
        fail_at(v.line, what + " has more than 3 components");
    Point p{0.0, 0.0, 0.0};
    std::copy(xs.begin(), xs.end(), p.begin());
    return p;
}

template <class F>
void with(const Value& table, const std::string& key, F&& f)
{
    if (const Value* v = table.find(key))
        f(*v);
}

ProfileSpec parse_profile(const Value& v, const std::string& what)
{
    if (v.type == Value::Type::number)
        return v.number == 0.0 ? ProfileSpec::zero() : ProfileSpec::constant(v.number);
    if (v.type != Value::Type::table)
        fail_at(v.line, what + " must be a number or a profile table { kind = ... }");
    const Value* kind_v = v.find("kind");
    if (!kind_v)
        fail_at(v.line, what + " needs a 'kind'");
    const std::string kind = as_string(*kind_v, what + ".kind");
    auto num = [&](const std::string& key, double fallback) {
        const Value* x = v.find(key);
        return x ? as_number(*x, what + "." + key) : fallback;
    };
    auto need = [&](const std::string& key) {
        const Value* x = v.find(key);
        if (!x)
            fail_at(v.line, what + " of kind " + kind + " needs '" + key + "'");
        return as_number(*x, what + "." + key);
    };

    ProfileSpec spec;
    const std::string where = what + " (kind " + kind + ")";
    if (kind == "zero") {
        check_keys(v, {"kind", "sign"}, where);
        spec = ProfileSpec::zero();
    } else if (kind == "constant") {
        check_keys(v, {"kind", "amplitude", "sign"}, where);
        spec = ProfileSpec::constant(need("amplitude"));
    } else if (kind == "gaussian") {
        check_keys(v, {"kind", "amplitude", "width", "center", "sign"}, where);
        Point c{0.0, 0.0, 0.0};
        with(v, "center", [&](const Value& x) { c = as_point(x, what + ".center"); });
        spec = ProfileSpec::gaussian(num("amplitude", 1.0), need("width"), c);
    } else if (kind == "plateau") {
        check_keys(v, {"kind", "amplitude", "r1", "r2", "sign"}, where);
        spec = ProfileSpec::plateau(num("amplitude", 1.0), need("r1"), need("r2"));
    } else if (kind == "polynomial") {
        check_keys(v, {"kind", "amplitude", "rate", "sign"}, where);
        spec = ProfileSpec::polynomial_decay(num("amplitude", 1.0), need("rate"));
    } else if (kind == "flat") {
        check_keys(v, {"kind", "amplitude", "r1", "r2", "sign"}, where);
        spec = ProfileSpec::asymptotically_flat(num("amplitude", 1.0), need("r1"), need("r2"));
    } else if (kind == "sum") {
        check_keys(v, {"kind", "terms", "sign"}, where);
        const Value* terms = v.find("terms");
        if (!terms || terms->type != Value::Type::array || terms->items.empty())
            fail_at(v.line, what + " of kind sum needs a non-empty 'terms' array");
        std::vector<ProfileSpec> parts;
        for (std::size_t i = 0; i < terms->items.size(); ++i)
            parts.push_back(parse_profile(terms->items[i], what + ".terms[" + std::to_string(i) + "]"));
        spec = ProfileSpec::sum(parts);
    } else {
        fail_at(kind_v->line, "unknown profile kind '" + kind
                                  + "'; valid kinds: zero constant gaussian plateau polynomial flat sum");
    }
    with(v, "sign", [&](const Value& x) { spec.sign = as_number(x, what + ".sign"); });
    try {
        validate(spec);
    } catch (const ConfigError& e) {
        fail_at(v.line, what + ": " + e.what());
    }
    return spec;
}

const std::vector<std::string> kSections{"grid", "physics", "initial", "integrator", "diagnostics",
                                         "output", "overrides", "sweep"};

} // namespace

const std::vector<std::string>& sweep_axis_names()
{
    static const std::vector<std::string> names{"sigma1", "sigma2", "sigma3", "a_amplitude",
                                                "V_amplitude", "dt", "N"};
    return names;
}

RunConfig parse_config(std::string_view text)
{
    const Value root = Parser(text).document();
    RunConfig cfg;

    std::vector<std::string> root_keys = kSections;
    root_keys.push_back("seed");
    check_keys(root, root_keys, "the top level");
    for (std::size_t i = 0; i < root.keys.size(); ++i) {
        const bool is_section = std::find(kSections.begin(), kSections.end(), root.keys[i]) != kSections.end();
        if (is_section != (root.items[i].type == Value::Type::table))
            fail_at(root.items[i].line, "'" + root.keys[i] + (is_section ? "' must be a [section]" : "' must be a value"));
    }
    with(root, "seed", [&](const Value& v) {
        const double s = as_number(v, "seed");
        if (s < 0 || s != std::floor(s))
            fail_at(v.line, "seed must be a non-negative integer");
        cfg.seed = static_cast<std::uint64_t>(s);
    });

    with(root, "grid", [&](const Value& t) {
        check_keys(t, {"d", "N", "L"}, "[grid]");
        with(t, "d", [&](const Value& v) { cfg.grid.d = as_int(v, "grid.d"); });
        with(t, "N", [&](const Value& v) { cfg.grid.N = as_int(v, "grid.N"); });
        with(t, "L", [&](const Value& v) { cfg.grid.L = as_number(v, "grid.L"); });
    });
    with(root, "physics", [&](const Value& t) {
        check_keys(t, {"sigma1", "sigma2", "sigma3", "a", "V"}, "[physics]");
        with(t, "sigma1", [&](const Value& v) { cfg.physics.exponents.sigma1 = as_number(v, "sigma1"); });
        with(t, "sigma2", [&](const Value& v) { cfg.physics.exponents.sigma2 = as_number(v, "sigma2"); });
        with(t, "sigma3", [&](const Value& v) { cfg.physics.exponents.sigma3 = as_number(v, "sigma3"); });
        with(t, "a", [&](const Value& v) { cfg.physics.a = parse_profile(v, "physics.a"); });
        with(t, "V", [&](const Value& v) { cfg.physics.V = parse_profile(v, "physics.V"); });
    });
    with(root, "initial", [&](const Value& t) {
        check_keys(t, {"profile", "k", "perturbation", "file"}, "[initial]");
        with(t, "profile", [&](const Value& v) { cfg.initial.profile = parse_profile(v, "initial.profile"); });
        with(t, "k", [&](const Value& v) { cfg.initial.k = as_point(v, "initial.k"); });
        with(t, "perturbation", [&](const Value& v) { cfg.initial.perturbation = as_number(v, "perturbation"); });
        with(t, "file", [&](const Value& v) { cfg.initial.file = as_string(v, "initial.file"); });
    });
    with(root, "integrator", [&](const Value& t) {
        check_keys(t, {"dt", "T", "cadence", "dealias"}, "[integrator]");
        with(t, "dt", [&](const Value& v) { cfg.integrator.dt = as_number(v, "dt"); });
        with(t, "T", [&](const Value& v) { cfg.integrator.T = as_number(v, "T"); });
        with(t, "cadence", [&](const Value& v) { cfg.integrator.cadence = as_int(v, "cadence"); });
        with(t, "dealias", [&](const Value& v) { cfg.integrator.dealias = as_bool(v, "dealias"); });
    });
    with(root, "diagnostics", [&](const Value& t) {
        check_keys(t,
                   {"virial", "interaction_B", "snapshots", "dyadic_scattering", "dyadic_t0", "leak_tol", "C_mon",
                    "calibrate", "order_check", "scattering_threshold", "virial_oversample"},
                   "[diagnostics]");
        auto& d = cfg.diagnostics;
        with(t, "virial", [&](const Value& v) { d.virial = as_bool(v, "virial"); });
        with(t, "interaction_B", [&](const Value& v) { d.interaction_B = as_bool(v, "interaction_B"); });
        with(t, "snapshots", [&](const Value& v) { d.snapshots = as_int(v, "snapshots"); });
        with(t, "dyadic_scattering", [&](const Value& v) { d.dyadic_scattering = as_bool(v, "dyadic_scattering"); });
        with(t, "dyadic_t0", [&](const Value& v) { d.dyadic_t0 = as_number(v, "dyadic_t0"); });
        with(t, "leak_tol", [&](const Value& v) { d.leak_tol = as_number(v, "leak_tol"); });
        with(t, "C_mon", [&](const Value& v) { d.C_mon = as_number(v, "C_mon"); });
        with(t, "calibrate", [&](const Value& v) { d.calibrate = as_bool(v, "calibrate"); });
        with(t, "order_check", [&](const Value& v) { d.order_check = as_bool(v, "order_check"); });
        with(t, "virial_oversample",
             [&](const Value& v) { d.virial_oversample = as_int(v, "virial_oversample"); });
        with(t, "scattering_threshold",
             [&](const Value& v) { d.scattering_threshold = as_number(v, "scattering_threshold"); });
    });
    with(root, "output", [&](const Value& t) {
        check_keys(t, {"directory", "csv", "json", "fields"}, "[output]");
        with(t, "directory", [&](const Value& v) { cfg.output.directory = as_string(v, "directory"); });
        with(t, "csv", [&](const Value& v) { cfg.output.csv = as_bool(v, "csv"); });
        with(t, "json", [&](const Value& v) { cfg.output.json = as_bool(v, "json"); });
        with(t, "fields", [&](const Value& v) { cfg.output.fields = as_bool(v, "fields"); });
    });
    with(root, "overrides", [&](const Value& t) {
        check_keys(t, {"lambda", "eta"}, "[overrides]");
        with(t, "lambda", [&](const Value& v) { cfg.overrides.lambda = as_number(v, "overrides.lambda"); });
        with(t, "eta", [&](const Value& v) { cfg.overrides.eta = as_number(v, "overrides.eta"); });
    });
    with(root, "sweep", [&](const Value& t) {
        std::vector<std::string> allowed = sweep_axis_names();
        allowed.push_back("cap");
        check_keys(t, allowed, "[sweep]");
        for (std::size_t i = 0; i < t.keys.size(); ++i) {
            if (t.keys[i] == "cap") {
                cfg.sweep.cap = as_int(t.items[i], "sweep.cap");
                continue;
            }
            SweepAxis axis{t.keys[i], as_numbers(t.items[i], "sweep." + t.keys[i])};
            if (!axis.values.empty())
                cfg.sweep.axes.push_back(std::move(axis));
        }
    });

    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void validate(const RunConfig& c)
{
    (void)Grid(c.grid.d, c.grid.N, c.grid.L);
    validate(c.physics.exponents);
    validate(c.physics.a);
    validate(c.physics.V);
    validate(c.initial.profile);
    const auto& in = c.integrator;
    if (!(in.dt > 0.0) || !(in.T > 0.0))
        throw ConfigError("integrator dt and T must be positive");
    if (in.dt > in.T)
        throw ConfigError("integrator dt must not exceed T");
    (void)step_count(in.T, in.dt);
    if (in.cadence < 1)
        throw ConfigError("integrator cadence must be at least 1");
    const auto& d = c.diagnostics;
    if (d.snapshots < 0)
        throw ConfigError("diagnostics.snapshots must be >= 0");
    if (!(d.leak_tol > 0.0))
        throw ConfigError("diagnostics.leak_tol must be positive");
    if (!(d.C_mon >= 1.0))
        throw ConfigError("diagnostics.C_mon must be at least 1");
    if (d.virial_oversample < 1 || d.virial_oversample > 4)
        throw ConfigError("diagnostics.virial_oversample must be between 1 and 4");
    if (!(d.scattering_threshold > 0.0))
        throw ConfigError("diagnostics.scattering_threshold must be positive");
    if (d.dyadic_t0 < 0.0)
        throw ConfigError("diagnostics.dyadic_t0 must be >= 0");
    if (d.dyadic_t0 > 0.0)
        (void)step_count(d.dyadic_t0, in.dt);
    if (c.overrides.lambda && !(*c.overrides.lambda >= 0.0))
        throw ConfigError("overrides.lambda must be >= 0");
    if (c.overrides.eta && !(*c.overrides.eta > 0.0))
        throw ConfigError("overrides.eta must be positive");
    if (!std::isfinite(c.initial.perturbation) || c.initial.perturbation < 0.0)
        throw ConfigError("initial.perturbation must be >= 0");
    if (c.sweep.cap < 1)
        throw ConfigError("sweep.cap must be at least 1");
    std::size_t cells = 1;
    for (const auto& axis : c.sweep.axes)
        cells *= axis.values.size();
    if (cells > static_cast<std::size_t>(c.sweep.cap))
        throw ConfigError("sweep has " + std::to_string(cells) + " cells, above cap " + std::to_string(c.sweep.cap));
}

void apply_axis(RunConfig& c, const std::string& axis, double value)
{
    auto set_amplitude = [&](ProfileSpec& p) {
        for (auto& term : p.terms)
            term.amplitude = value;
    };
    if (axis == "sigma1")
        c.physics.exponents.sigma1 = value;
    else if (axis == "sigma2")
        c.physics.exponents.sigma2 = value;
    else if (axis == "sigma3")
        c.physics.exponents.sigma3 = value;
    else if (axis == "a_amplitude")
        set_amplitude(c.physics.a);
    else if (axis == "V_amplitude")
        set_amplitude(c.physics.V);
    else if (axis == "dt")
        c.integrator.dt = value;
    else if (axis == "N")
        c.grid.N = static_cast<int>(std::lround(value));
    else
        throw ConfigError("unknown sweep axis '" + axis + "'");
}

Grid make_grid(const RunConfig& c)
{
    return Grid(c.grid.d, c.grid.N, c.grid.L);
}

ProblemSpec make_problem(const RunConfig& c)
{
    return make_problem(make_grid(c), c.physics.exponents, c.physics.a, c.physics.V);
}

ComplexField make_initial(const RunConfig& c, const Grid& grid)
{
    if (!c.initial.file.empty()) {
        ComplexField f = read_field(std::filesystem::path(c.initial.file));
        if (!(f.grid() == grid))
            throw ConfigError("initial field file grid does not match [grid]");
        return f;
    }
    const int d = grid.dim();
    ComplexField u = ComplexField::from_function(grid, [&](const Point& x) {
        double phase = 0.0;
        for (int j = 0; j < d; ++j)
            phase += c.initial.k[j] * x[j];
        return sample(c.initial.profile, x, d).value * std::polar(1.0, phase);
    });
    if (c.initial.perturbation > 0.0) {
        // Smooth seeded noise: white complex Gaussian samples low-passed to the
        // inner quarter of the band and scaled to unit maximum modulus.
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> normal;
        ComplexField noise(grid);
        for (std::size_t p = 0; p < noise.size(); ++p) {
            const double re = normal(rng);
            noise[p] = Complex(re, normal(rng));
        }
        ComplexField spec = to_frequency(noise);
        const auto& mm = SpectralContext::of(grid)->max_abs_mode();
        for (std::size_t p = 0; p < spec.size(); ++p)
            if (mm[p] > grid.n() / 8)
                spec[p] = 0.0;
        noise = to_physical(spec);
        double peak = 0.0;
        for (std::size_t p = 0; p < noise.size(); ++p)
            peak = std::max(peak, std::abs(noise[p]));
        for (std::size_t p = 0; p < u.size(); ++p)
            u[p] *= 1.0 + c.initial.perturbation * noise[p] / peak;
    }
    return u;
}

} // namespace dnls
