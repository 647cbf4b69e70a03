from affdyn.cli import main

main()
