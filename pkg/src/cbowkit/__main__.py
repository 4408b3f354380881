from cbowkit.cli import main

main()
