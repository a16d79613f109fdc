// Command line interface; subcommands land here as the library fills in.
int main() { return 0; }
