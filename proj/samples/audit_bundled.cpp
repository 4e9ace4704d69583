// Audits the bundled PHPIDS-derived corpus and prints the text report.
#include <iostream>

#include <sigaudit/sigaudit.hpp>

int main()
{
    const std::string dir = SIGAUDIT_DATA_DIR;
    try {
        const auto c = sigaudit::load_corpus(dir + "/phpids_sqli_signatures.tsv", dir + "/phpids_sqli_vectors.tsv");
        sigaudit::audit_config cfg;
        cfg.set_a = sigaudit::load_id_list(dir + "/set_a.txt");
        const auto r = sigaudit::run_audit(c, sigaudit::pipeline::deployed(), cfg);
        std::cout << sigaudit::render(r, sigaudit::render_format::text);
    } catch (const sigaudit::error &e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
