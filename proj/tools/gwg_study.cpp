#include <iostream>

#include <gwg/gwg.hpp>
#include <gwg/study.hpp>

int
main(int argc, char** argv)
{
    gwg::StudyConfig cfg;
    try
    {
        cfg = gwg::parse_config(argc, argv);
    }
    catch (const gwg::HelpRequested& help)
    {
        std::cout << help.what();
        return gwg::exit_code::ok;
    }
    catch (const gwg::ConfigError& err)
    {
        std::cerr << "error: " << err.what() << '\n';
        return gwg::exit_code::bad_config;
    }

    try
    {
        return gwg::run(cfg, std::cout, std::cerr);
    }
    catch (const std::exception& err)
    {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}
