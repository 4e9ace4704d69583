// Feeds a payload through the deployed pipeline and reports which signatures fire,
// before and after normalization.
#include <iostream>

#include <sigaudit/sigaudit.hpp>

int main(int argc, char **argv)
{
    using namespace sigaudit;
    const std::string payload = argc > 1 ? argv[1] : "1%20and%201%20or%201%20having%201";
    const std::string dir = SIGAUDIT_DATA_DIR;
    const auto sigs = load_signatures_file(dir + "/phpids_sqli_signatures.tsv");
    const auto deployed = pipeline::deployed();
    const auto raw = pipeline::capability().apply(payload);
    const auto seen = deployed.apply(payload);

    std::cout << "raw:       " << raw << "\n";
    std::cout << "deployed:  " << seen << (deployed.prefilter_pass(seen) ? "" : "  [skipped by prefilter]") << "\n";
    for (const auto &s : sigs) {
        const auto cs = compile(s);
        const bool before = matches(cs, raw);
        const bool after = deployed.prefilter_pass(seen) && matches(cs, seen);
        if (before || after) std::cout << s.id << "  raw=" << before << " deployed=" << after << "\n";
    }
}
