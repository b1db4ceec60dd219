from cvmse.cli.commands import experiments, verify


def register(group):
    for command in experiments.COMMANDS:
        group.add_command(command)
    group.add_command(verify.verify_command)
