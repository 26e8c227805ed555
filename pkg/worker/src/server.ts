import * as net from 'node:net';
import { Readable, Writable } from 'node:stream';

import { JobRunner, handleMessage } from './protocol.js';

/** Stateful newline framer; bare fragments wait for their terminator. */
export function lineSplitter(onLine: (line: string) => void): (chunk: Buffer | string) => void {
  let pending = '';
  return chunk => {
    pending += chunk.toString();
    let cut;
    while ((cut = pending.indexOf('\n')) >= 0) {
      const line = pending.slice(0, cut);
      pending = pending.slice(cut + 1);
      if (line.trim().length > 0) onLine(line);
    }
  };
}

/**
 * Serve the protocol over a stream pair until the input ends.
 *
 * Requests run strictly one after another (one training job at a time
 * per worker); a line that is not JSON gets an error reply instead of
 * killing the process.
 */
export function attachLineServer(input: Readable, output: Writable, runner: JobRunner): Promise<void> {
  const emit = (reply: Record<string, unknown>) => {
    output.write(JSON.stringify(reply) + '\n');
  };
  let queue: Promise<void> = Promise.resolve();

  const feed = lineSplitter(line => {
    queue = queue.then(async () => {
      let msg: unknown;
      try {
        msg = JSON.parse(line);
      } catch {
        emit({ type: 'error', id: null, transient: false, msg: 'request is not valid JSON' });
        return;
      }
      await handleMessage(msg, runner, emit);
    });
  });

  return new Promise(resolve => {
    input.on('data', feed);
    input.on('end', () => {
      void queue.then(resolve);
    });
    input.on('error', () => {
      void queue.then(resolve);
    });
  });
}

export function serveTcp(host: string, port: number, runner: JobRunner, onReady?: (port: number) => void): net.Server {
  const server = net.createServer(socket => {
    socket.on('error', () => socket.destroy());
    void attachLineServer(socket, socket, runner);
  });
  server.listen(port, host, () => {
    const addr = server.address();
    onReady?.(typeof addr === 'object' && addr !== null ? addr.port : port);
  });
  return server;
}
