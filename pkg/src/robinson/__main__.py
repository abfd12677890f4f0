from robinson.cli import main; main()
