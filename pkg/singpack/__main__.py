from singpack.main import main

main()
