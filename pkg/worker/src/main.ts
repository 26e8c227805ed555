import './quiet.js';

import { parseArgs } from 'node:util';

import * as tf from '@tensorflow/tfjs';

import { loadBundle } from './data.js';
import { makeRunner } from './protocol.js';
import { attachLineServer, serveTcp } from './server.js';

const USAGE = `usage: node dist/main.js --data <dir> [--listen [host:]port] [--device <backend>]

Serves the trainer protocol over stdio, or over TCP with --listen.
--data    dataset directory holding train/ val/ test/ splits
--device  tfjs backend to use (default: cpu)`;

function fail(msg: string): never {
  process.stderr.write(msg + '\n');
  process.exit(2);
}

async function main(): Promise<void> {
  let args;
  try {
    args = parseArgs({
      options: {
        data: { type: 'string' },
        listen: { type: 'string' },
        device: { type: 'string', default: 'cpu' },
        help: { type: 'boolean', default: false },
      },
    }).values;
  } catch (err) {
    fail(`${err instanceof Error ? err.message : err}\n${USAGE}`);
  }
  if (args.help) {
    process.stderr.write(USAGE + '\n');
    return;
  }
  if (!args.data) {
    fail(`--data is required\n${USAGE}`);
  }

  if (!(await tf.setBackend(args.device!))) {
    fail(`tfjs backend '${args.device}' is not available here`);
  }
  await tf.ready();

  let runner;
  try {
    runner = makeRunner(loadBundle(args.data!));
  } catch (err) {
    fail(`failed to load dataset: ${err instanceof Error ? err.message : err}`);
  }

  if (args.listen) {
    const sep = args.listen.lastIndexOf(':');
    const host = sep > 0 ? args.listen.slice(0, sep) : '127.0.0.1';
    const port = Number(args.listen.slice(sep + 1));
    if (!Number.isInteger(port) || port < 0) {
      fail(`--listen expects [host:]port, got '${args.listen}'`);
    }
    serveTcp(host, port, runner, bound => {
      process.stderr.write(`listening on ${host}:${bound}\n`);
    });
  } else {
    await attachLineServer(process.stdin, process.stdout, runner);
  }
}

main().catch(err => {
  fail(err instanceof Error ? (err.stack ?? err.message) : String(err));
});
