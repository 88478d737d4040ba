"""
Command-line front end: experiment configuration, subcommands and run reports.
"""
