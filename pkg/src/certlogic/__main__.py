from certlogic.cli import main

main()
