#include "mlao/scheme.hpp"

#include <sstream>

namespace mlao {

SchemeTag scheme_tag_from_string(const std::string& s)
{
    if (s == "ast2") return SchemeTag::ast2;
    if (s == "ast4") return SchemeTag::ast4;
    if (s == "2n" || s == "2N" || s == "two_n") return SchemeTag::two_n;
    if (s == "4n" || s == "4N" || s == "four_n") return SchemeTag::four_n;
    throw std::invalid_argument("unknown scheme: " + s + " (expected ast2, ast4, 2n or 4n)");
}

std::string to_string(SchemeTag t)
{
    switch (t) {
    case SchemeTag::ast2: return "ast2";
    case SchemeTag::ast4: return "ast4";
    case SchemeTag::two_n: return "2n";
    case SchemeTag::four_n: return "4n";
    }
    return "ast2";
}

std::vector<BiasPair> CorrectionScheme::pairs() const
{
    std::vector<BiasPair> out;
    for (int m : bias_modes) {
        for (double d : bias_depths) out.push_back({m, d});
    }
    return out;
}

std::vector<ZernikeVector> CorrectionScheme::biases() const
{
    std::vector<ZernikeVector> out;
    for (const auto& p : pairs()) {
        out.push_back(ZernikeVector{{p.mode, p.depth}});
        out.push_back(ZernikeVector{{p.mode, -p.depth}});
    }
    return out;
}

CorrectionScheme make_scheme(SchemeTag tag, std::vector<int> corrected_modes)
{
    require(!corrected_modes.empty(), "a scheme needs at least one corrected mode");
    for (int m : corrected_modes) require(m >= 2, "corrected modes must have Noll index >= 2");
    CorrectionScheme s;
    s.tag = tag;
    s.corrected_modes = std::move(corrected_modes);
    switch (tag) {
    case SchemeTag::ast2:
        s.bias_modes = {5};
        s.bias_depths = {1.0};
        break;
    case SchemeTag::ast4:
        s.bias_modes = {5};
        s.bias_depths = {0.5, 1.0};
        break;
    case SchemeTag::two_n:
        s.bias_modes = s.corrected_modes;
        s.bias_depths = {1.0};
        break;
    case SchemeTag::four_n:
        s.bias_modes = s.corrected_modes;
        s.bias_depths = {0.5, 1.0};
        break;
    }
    return s;
}

std::vector<int> default_corrected_modes()
{
    return {5, 6, 7, 8, 11};
}

std::vector<int> parse_mode_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-');
        try {
            if (dash == std::string::npos) {
                out.push_back(std::stoi(item));
            } else {
                const int a = std::stoi(item.substr(0, dash));
                const int b = std::stoi(item.substr(dash + 1));
                require(a <= b, "bad mode range: " + item);
                for (int m = a; m <= b; ++m) out.push_back(m);
            }
        } catch (const std::logic_error&) {
            throw std::invalid_argument("bad mode list: " + s);
        }
    }
    require(!out.empty(), "empty mode list");
    return out;
}

std::string format_mode_list(const std::vector<int>& modes)
{
    std::string out;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(modes[i]);
    }
    return out;
}

} // namespace mlao
