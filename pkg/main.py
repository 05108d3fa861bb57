from cli.main import main as cli_main


def main():
    """Entry point for seesawtrack CLI."""
    cli_main()


if __name__ == "__main__":
    main()
